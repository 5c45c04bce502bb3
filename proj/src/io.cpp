#include "pointmatch/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace pointmatch {

namespace {

std::ofstream open_out(const std::filesystem::path& path, bool binary = false) {
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    return out;
}

std::ifstream open_in(const std::filesystem::path& path, bool binary = false) {
    std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
    if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
    return in;
}

void expect_magic(std::istream& in, const std::string& magic, const std::string& what) {
    std::string word;
    in >> word;
    if (word != magic) throw std::runtime_error(what + ": bad magic '" + word + "'");
    in >> word;
    if (word != "v1") throw std::runtime_error(what + ": unsupported version '" + word + "'");
}

double parse_real(const std::string& tok, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(what + ": bad real '" + tok + "'");
    }
}

}  // namespace

std::string format_real(double v, int significant_digits) {
    char buf[64];
    if (std::isnan(v)) return "nan";
    std::snprintf(buf, sizeof(buf), "%.*g", significant_digits, v);
    return buf;
}

void write_scene(const std::filesystem::path& path, const PointCloud& cloud) {
    cloud.validate();
    std::ofstream out = open_out(path);
    out << "pointmatch-scene v1 " << cloud.size() << " " << cloud.num_classes << "\n";
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        for (std::size_t a = 0; a < 3; ++a) out << format_real(cloud.positions(i, a), 9) << " ";
        for (std::size_t a = 0; a < 3; ++a) out << format_real(cloud.colors(i, a), 9) << " ";
        out << (cloud.has_gt() ? cloud.gt_labels[i] : -1) << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

PointCloud read_scene(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    expect_magic(in, "pointmatch-scene", path.string());
    std::size_t n = 0;
    int c = 0;
    in >> n >> c;
    if (!in || n == 0 || c <= 0) throw std::runtime_error(path.string() + ": bad header");

    PointCloud cloud;
    cloud.num_classes = c;
    cloud.positions = Matrix(n, 3);
    cloud.colors = Matrix(n, 3);
    std::vector<int> labels(n);
    bool any_label = false;
    for (std::size_t i = 0; i < n; ++i) {
        std::string tok;
        for (std::size_t a = 0; a < 3; ++a) {
            in >> tok;
            cloud.positions(i, a) = parse_real(tok, path.string());
        }
        for (std::size_t a = 0; a < 3; ++a) {
            in >> tok;
            cloud.colors(i, a) = parse_real(tok, path.string());
        }
        in >> labels[i];
        if (!in) throw std::runtime_error(path.string() + ": truncated at point " +
                                          std::to_string(i));
        if (labels[i] >= 0) any_label = true;
    }
    if (any_label) {
        for (std::size_t i = 0; i < n; ++i) {
            if (labels[i] < 0)
                throw std::runtime_error(path.string() + ": mixed labeled/unknown points");
        }
        cloud.gt_labels = std::move(labels);
    }
    cloud.validate();
    return cloud;
}

void write_instances(const std::filesystem::path& path, const std::vector<int>& instance_ids) {
    std::ofstream out = open_out(path);
    out << "pointmatch-inst v1 " << instance_ids.size() << "\n";
    for (int id : instance_ids) out << id << "\n";
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<int> read_instances(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    expect_magic(in, "pointmatch-inst", path.string());
    std::size_t n = 0;
    in >> n;
    std::vector<int> ids(n);
    for (std::size_t i = 0; i < n; ++i) in >> ids[i];
    if (!in) throw std::runtime_error(path.string() + ": truncated instance file");
    return ids;
}

void write_weak_labels(const std::filesystem::path& path, const WeakLabels& weak) {
    std::ofstream out = open_out(path);
    out << "pointmatch-weak v1 " << weak.count() << "\n";
    for (std::size_t i = 0; i < weak.count(); ++i)
        out << weak.indices[i] << " " << weak.classes[i] << "\n";
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

WeakLabels read_weak_labels(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    expect_magic(in, "pointmatch-weak", path.string());
    std::size_t k = 0;
    in >> k;
    WeakLabels weak;
    weak.indices.resize(k);
    weak.classes.resize(k);
    for (std::size_t i = 0; i < k; ++i) in >> weak.indices[i] >> weak.classes[i];
    if (!in) throw std::runtime_error(path.string() + ": truncated weak-label file");
    return weak;
}

void write_partition(const std::filesystem::path& path, const SuperPointPartition& part) {
    part.validate();
    std::ofstream out = open_out(path);
    out << "pointmatch-sp v1 " << part.size() << " " << part.num_groups << "\n";
    for (int g : part.group_of) out << g << "\n";
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

SuperPointPartition read_partition(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    expect_magic(in, "pointmatch-sp", path.string());
    std::size_t n = 0;
    int m = 0;
    in >> n >> m;
    SuperPointPartition part;
    part.num_groups = m;
    part.group_of.resize(n);
    for (std::size_t i = 0; i < n; ++i) in >> part.group_of[i];
    if (!in) throw std::runtime_error(path.string() + ": truncated partition file");
    part.validate();
    return part;
}

namespace {

void write_le_double(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    if constexpr (std::endian::native == std::endian::big) {
        bits = __builtin_bswap64(bits);
    }
    char buf[8];
    std::memcpy(buf, &bits, 8);
    out.write(buf, 8);
}

double read_le_double(std::istream& in) {
    char buf[8];
    in.read(buf, 8);
    std::uint64_t bits;
    std::memcpy(&bits, buf, 8);
    if constexpr (std::endian::native == std::endian::big) {
        bits = __builtin_bswap64(bits);
    }
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const MlpParams& params) {
    params.validate();
    std::ofstream out = open_out(path, /*binary=*/true);
    out << "pointmatch-ckpt v1\n";
    out << "dims " << params.feature_dim();
    for (const Layer& layer : params.layers) out << " " << layer.weights.rows();
    out << "\n";
    for (const Layer& layer : params.layers) {
        for (double w : layer.weights.data()) write_le_double(out, w);
        for (double b : layer.biases) write_le_double(out, b);
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

MlpParams read_checkpoint(const std::filesystem::path& path) {
    std::ifstream in = open_in(path, /*binary=*/true);
    std::string line;
    std::getline(in, line);
    if (line != "pointmatch-ckpt v1")
        throw std::runtime_error(path.string() + ": bad checkpoint magic");
    std::getline(in, line);
    std::istringstream dims_line(line);
    std::string word;
    dims_line >> word;
    if (word != "dims") throw std::runtime_error(path.string() + ": missing dims line");
    std::vector<std::size_t> dims;
    std::size_t d = 0;
    while (dims_line >> d) dims.push_back(d);
    if (dims.size() != 4) throw std::runtime_error(path.string() + ": expected 4 dims");

    MlpParams params;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        Layer layer;
        layer.weights = Matrix(dims[l + 1], dims[l]);
        layer.biases.assign(dims[l + 1], 0.0);
        for (double& w : layer.weights.data()) w = read_le_double(in);
        for (double& b : layer.biases) b = read_le_double(in);
        params.layers.push_back(std::move(layer));
    }
    if (!in) throw std::runtime_error(path.string() + ": truncated checkpoint");
    params.validate();
    return params;
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries) {
    std::ofstream out = open_out(path);
    out << "manifest v1\n";
    for (const ManifestEntry& e : entries) {
        out << e.file << " " << e.num_points << " " << e.num_classes << " " << e.seed << " "
            << e.split << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    expect_magic(in, "manifest", path.string());
    std::vector<ManifestEntry> entries;
    ManifestEntry e;
    while (in >> e.file >> e.num_points >> e.num_classes >> e.seed >> e.split) {
        if (e.split != "train" && e.split != "val")
            throw std::runtime_error(path.string() + ": unknown split '" + e.split + "'");
        entries.push_back(e);
    }
    return entries;
}

void write_metrics_csv(const std::filesystem::path& path,
                       const std::vector<EpochMetrics>& history) {
    std::ofstream out = open_out(path);
    out << "epoch,w,l_ce,l_pl,l_pl_sp,l_total,mask_rate,sp_mask_rate,pl_accuracy,"
           "sp_pl_accuracy,val_miou\n";
    for (const EpochMetrics& m : history) {
        out << m.epoch << "," << format_real(m.w, 17) << "," << format_real(m.l_ce, 17) << ","
            << format_real(m.l_pl, 17) << "," << format_real(m.l_pl_sp, 17) << ","
            << format_real(m.l_total, 17) << "," << format_real(m.mask_rate, 17) << ","
            << format_real(m.sp_mask_rate, 17) << "," << format_real(m.pl_accuracy, 17) << ","
            << format_real(m.sp_pl_accuracy, 17) << "," << format_real(m.val_miou, 17) << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<EpochMetrics> read_metrics_csv(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("epoch,", 0) != 0)
        throw std::runtime_error(path.string() + ": missing metrics header");
    std::vector<EpochMetrics> history;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string tok;
        std::vector<std::string> cells;
        while (std::getline(row, tok, ',')) cells.push_back(tok);
        if (cells.size() != 11)
            throw std::runtime_error(path.string() + ": bad metrics row '" + line + "'");
        auto real = [&](std::size_t i) {
            if (cells[i] == "nan") return std::numeric_limits<double>::quiet_NaN();
            return parse_real(cells[i], path.string());
        };
        EpochMetrics m;
        m.epoch = std::stol(cells[0]);
        m.w = real(1);
        m.l_ce = real(2);
        m.l_pl = real(3);
        m.l_pl_sp = real(4);
        m.l_total = real(5);
        m.mask_rate = real(6);
        m.sp_mask_rate = real(7);
        m.pl_accuracy = real(8);
        m.sp_pl_accuracy = real(9);
        m.val_miou = real(10);
        history.push_back(m);
    }
    return history;
}

}  // namespace pointmatch
