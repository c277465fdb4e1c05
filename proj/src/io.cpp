#include "pwa/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace pwa {

using nlohmann::json;

// ------------------------------------------------------------------- IDX

namespace {

std::uint32_t read_be32(std::istream& is, const char* what, std::streamoff offset) {
    unsigned char buf[4];
    if (!is.read(reinterpret_cast<char*>(buf), 4))
        throw IdxError(IdxErrorKind::truncated,
                       std::string("idx: truncated while reading ") + what +
                           " at offset " + std::to_string(offset));
    return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
           (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

void write_be32(std::ostream& os, std::uint32_t v) {
    unsigned char buf[4] = {static_cast<unsigned char>(v >> 24),
                            static_cast<unsigned char>(v >> 16),
                            static_cast<unsigned char>(v >> 8),
                            static_cast<unsigned char>(v)};
    os.write(reinterpret_cast<char*>(buf), 4);
}

}  // namespace

IdxImages load_idx_images(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IdxError(IdxErrorKind::io, "idx: cannot open " + path.string());
    const std::uint32_t magic = read_be32(is, "magic", 0);
    if (magic != 0x00000803u)
        throw IdxError(IdxErrorKind::bad_magic,
                       "idx: bad image magic at offset 0: got " + std::to_string(magic));
    const std::uint32_t n = read_be32(is, "count", 4);
    const std::uint32_t h = read_be32(is, "height", 8);
    const std::uint32_t w = read_be32(is, "width", 12);
    if (h == 0 || w == 0 || h > 4096 || w > 4096 || n > 10'000'000u)
        throw IdxError(IdxErrorKind::dimension_overflow,
                       "idx: implausible dimensions " + std::to_string(n) + "x" +
                           std::to_string(h) + "x" + std::to_string(w));
    IdxImages out;
    out.count = static_cast<int>(n);
    out.height = static_cast<int>(h);
    out.width = static_cast<int>(w);
    const std::size_t pixels = std::size_t(h) * w;
    out.data.resize(n, static_cast<Eigen::Index>(pixels));
    std::vector<unsigned char> row(pixels);
    for (std::uint32_t i = 0; i < n; ++i) {
        if (!is.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(pixels)))
            throw IdxError(IdxErrorKind::truncated,
                           "idx: truncated payload at image " + std::to_string(i));
        for (std::size_t p = 0; p < pixels; ++p)
            out.data(i, static_cast<Eigen::Index>(p)) = row[p] / 255.0;
    }
    return out;
}

void write_idx_images(const std::filesystem::path& path, const Eigen::MatrixXd& data,
                      int height, int width) {
    if (data.cols() != static_cast<Eigen::Index>(height) * width)
        throw std::invalid_argument("write_idx_images: shape mismatch");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IdxError(IdxErrorKind::io, "idx: cannot write " + path.string());
    write_be32(os, 0x00000803u);
    write_be32(os, static_cast<std::uint32_t>(data.rows()));
    write_be32(os, static_cast<std::uint32_t>(height));
    write_be32(os, static_cast<std::uint32_t>(width));
    for (Eigen::Index i = 0; i < data.rows(); ++i)
        for (Eigen::Index p = 0; p < data.cols(); ++p) {
            const double v = std::min(1.0, std::max(0.0, data(i, p)));
            const unsigned char b = static_cast<unsigned char>(std::lround(v * 255.0));
            os.write(reinterpret_cast<const char*>(&b), 1);
        }
}

std::vector<int> load_idx_labels(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IdxError(IdxErrorKind::io, "idx: cannot open " + path.string());
    const std::uint32_t magic = read_be32(is, "magic", 0);
    if (magic != 0x00000801u)
        throw IdxError(IdxErrorKind::bad_magic,
                       "idx: bad label magic at offset 0: got " + std::to_string(magic));
    const std::uint32_t n = read_be32(is, "count", 4);
    std::vector<int> out(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        unsigned char b;
        if (!is.read(reinterpret_cast<char*>(&b), 1))
            throw IdxError(IdxErrorKind::truncated,
                           "idx: truncated labels at " + std::to_string(i));
        out[i] = b;
    }
    return out;
}

// ------------------------------------------------------------ arch <-> json

namespace {

json arch_to_json(const ArchitectureSpec& a) {
    json j;
    j["kind"] = a.kind == ArchitectureSpec::Kind::conv ? "conv" : "dense";
    j["squash"] =
        a.output_squash == ArchitectureSpec::Squash::sigmoid ? "sigmoid" : "linear";
    j["channels"] = a.channels;
    j["height"] = a.height;
    j["width"] = a.width;
    j["conv_channels"] = a.conv_channels;
    j["up_channels"] = a.up_channels;
    j["batch_norm"] = a.batch_norm;
    j["input_dim"] = a.input_dim;
    j["hidden"] = a.hidden;
    return j;
}

ArchitectureSpec arch_from_json(const json& j) {
    ArchitectureSpec a;
    a.kind = j.at("kind") == "conv" ? ArchitectureSpec::Kind::conv
                                    : ArchitectureSpec::Kind::dense;
    a.output_squash = j.at("squash") == "sigmoid" ? ArchitectureSpec::Squash::sigmoid
                                                  : ArchitectureSpec::Squash::linear;
    a.channels = j.at("channels");
    a.height = j.at("height");
    a.width = j.at("width");
    a.conv_channels = j.at("conv_channels").get<std::vector<int>>();
    a.up_channels = j.at("up_channels").get<std::vector<int>>();
    a.batch_norm = j.at("batch_norm");
    a.input_dim = j.at("input_dim");
    a.hidden = j.at("hidden").get<std::vector<int>>();
    return a;
}

json split_to_json(const LatentSplit& s) { return json::array({s.d1, s.d2, s.d3}); }

LatentSplit split_from_json(const json& j) {
    return LatentSplit{j.at(0), j.at(1), j.at(2)};
}

}  // namespace

// ------------------------------------------------------------ checkpoints

namespace {

constexpr char kCkptMagic[8] = {'P', 'W', 'A', 'E', 'C', 'K', 'P', 'T'};

void write_u64(std::ostream& os, std::uint64_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint64_t read_u64(std::istream& is) {
    std::uint64_t v = 0;
    if (!is.read(reinterpret_cast<char*>(&v), sizeof(v)))
        throw std::runtime_error("checkpoint: truncated");
    return v;
}

void write_doubles(std::ostream& os, const Eigen::VectorXd& v) {
    write_u64(os, static_cast<std::uint64_t>(v.size()));
    os.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(v.size() * sizeof(double)));
}

Eigen::VectorXd read_doubles(std::istream& is) {
    const std::uint64_t n = read_u64(is);
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    if (!is.read(reinterpret_cast<char*>(v.data()),
                 static_cast<std::streamsize>(n * sizeof(double))))
        throw std::runtime_error("checkpoint: truncated parameter block");
    return v;
}

Eigen::VectorXd flatten_state(const std::vector<Eigen::MatrixXd*>& state) {
    Eigen::Index total = 0;
    for (auto* m : state) total += m->size();
    Eigen::VectorXd v(total);
    Eigen::Index at = 0;
    for (auto* m : state) {
        v.segment(at, m->size()) = Eigen::Map<const Eigen::VectorXd>(m->data(), m->size());
        at += m->size();
    }
    return v;
}

void unflatten_state(const std::vector<Eigen::MatrixXd*>& state,
                     const Eigen::VectorXd& v) {
    Eigen::Index at = 0;
    for (auto* m : state) {
        Eigen::Map<Eigen::VectorXd>(m->data(), m->size()) = v.segment(at, m->size());
        at += m->size();
    }
    if (at != v.size()) throw std::runtime_error("checkpoint: state length mismatch");
}

}  // namespace

namespace {

std::string vector_bytes(const Eigen::VectorXd& v) {
    return std::string(reinterpret_cast<const char*>(v.data()),
                       static_cast<std::size_t>(v.size()) * sizeof(double));
}

}  // namespace

void save_checkpoint(PairedModel& model, const std::filesystem::path& path,
                     const std::string& task_id, const std::string& config_hash,
                     std::uint64_t seed) {
    const Eigen::VectorXd theta = nn::flatten(model.params());
    const Eigen::VectorXd state = flatten_state(model.state());
    json manifest;
    manifest["version"] = 1;
    manifest["theta_hash"] = fnv1a_hex(vector_bytes(theta) + vector_bytes(state));
    manifest["arch1"] = arch_to_json(model.arch1());
    manifest["arch2"] = arch_to_json(model.arch2());
    manifest["split"] = split_to_json(model.split());
    manifest["task"] = task_id;
    manifest["config_hash"] = config_hash;
    manifest["seed"] = seed;
    const std::string mtext = manifest.dump();

    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("checkpoint: cannot write " + path.string());
    os.write(kCkptMagic, sizeof(kCkptMagic));
    write_u64(os, mtext.size());
    os.write(mtext.data(), static_cast<std::streamsize>(mtext.size()));
    write_doubles(os, theta);
    write_doubles(os, state);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open " + path.string());
    char magic[8];
    if (!is.read(magic, 8) || std::memcmp(magic, kCkptMagic, 8) != 0)
        throw std::runtime_error("checkpoint: bad magic");
    const std::uint64_t mlen = read_u64(is);
    std::string mtext(mlen, '\0');
    if (!is.read(mtext.data(), static_cast<std::streamsize>(mlen)))
        throw std::runtime_error("checkpoint: truncated manifest");
    json manifest;
    try {
        manifest = json::parse(mtext);
    } catch (const json::parse_error&) {
        throw std::runtime_error("checkpoint: corrupt manifest");
    }

    Checkpoint ck;
    ck.task_id = manifest.at("task");
    ck.config_hash = manifest.at("config_hash");
    ck.seed = manifest.at("seed");
    ck.model = PairedModel::build(arch_from_json(manifest.at("arch1")),
                                  arch_from_json(manifest.at("arch2")),
                                  split_from_json(manifest.at("split")), ck.seed);
    const Eigen::VectorXd theta = read_doubles(is);
    const Eigen::VectorXd state = read_doubles(is);
    const auto params = ck.model.params();
    Eigen::Index expected = 0;
    for (const auto& p : params) expected += p.value->size();
    if (theta.size() != expected)
        throw std::runtime_error(
            "checkpoint: manifest mismatch (parameter count disagrees with "
            "declared architecture)");
    if (manifest.contains("theta_hash") &&
        manifest["theta_hash"] != fnv1a_hex(vector_bytes(theta) + vector_bytes(state)))
        throw std::runtime_error(
            "checkpoint: manifest mismatch (payload hash disagrees with manifest)");
    nn::unflatten(params, theta);
    unflatten_state(ck.model.state(), state);
    return ck;
}

// ----------------------------------------------------------------- config

namespace {

json run_config_to_json(const RunConfig& c) {
    json j;
    j["task"]["kind"] = to_string(c.task.kind);
    j["task"]["noise_std"] = c.task.noise_std;
    j["task"]["height"] = c.task.image_height;
    j["task"]["width"] = c.task.image_width;
    j["task"]["mask"] = std::vector<double>(c.task.mask.data(),
                                            c.task.mask.data() + c.task.mask.size());
    j["arch1"] = arch_to_json(c.arch1);
    j["arch2"] = arch_to_json(c.arch2);
    j["split"] = split_to_json(c.split);
    j["train"]["lambda1"] = c.train.lambda1;
    j["train"]["lambda2"] = c.train.lambda2;
    j["train"]["divergence"] = to_string(c.train.divergence.kind);
    j["train"]["sinkhorn_epsilon"] = c.train.divergence.sinkhorn.epsilon;
    j["train"]["sinkhorn_epsilon_scale"] = c.train.divergence.sinkhorn.epsilon_scale;
    j["train"]["sinkhorn_max_iters"] = c.train.divergence.sinkhorn.max_iters;
    j["train"]["sinkhorn_tol"] = c.train.divergence.sinkhorn.tol;
    j["train"]["n_projections"] = c.train.divergence.n_projections;
    j["train"]["mmd_bandwidth"] = c.train.divergence.mmd_bandwidth;
    j["train"]["batch_size"] = c.train.batch_size;
    j["train"]["learning_rate"] = c.train.learning_rate;
    j["train"]["iterations"] = c.train.iterations;
    j["train"]["seed"] = c.train.seed;
    j["eval"]["n_samples"] = c.eval.n_samples;
    j["eval"]["use_oracle"] = c.eval.use_oracle;
    j["output_dir"] = c.output_dir;
    return j;
}

RunConfig run_config_from_json(const json& j) {
    RunConfig c;
    const json& t = j.at("task");
    c.task.kind = task_from_string(t.at("kind"));
    c.task.noise_std = t.at("noise_std");
    c.task.image_height = t.at("height");
    c.task.image_width = t.at("width");
    const auto mask = t.at("mask").get<std::vector<double>>();
    c.task.mask = Eigen::Map<const Eigen::VectorXd>(mask.data(),
                                                    static_cast<Eigen::Index>(mask.size()));
    c.arch1 = arch_from_json(j.at("arch1"));
    c.arch2 = arch_from_json(j.at("arch2"));
    c.split = split_from_json(j.at("split"));
    const json& tr = j.at("train");
    c.train.lambda1 = tr.at("lambda1");
    c.train.lambda2 = tr.at("lambda2");
    c.train.divergence.kind = divergence_from_string(tr.at("divergence"));
    c.train.divergence.sinkhorn.epsilon = tr.at("sinkhorn_epsilon");
    c.train.divergence.sinkhorn.epsilon_scale = tr.at("sinkhorn_epsilon_scale");
    c.train.divergence.sinkhorn.max_iters = tr.at("sinkhorn_max_iters");
    c.train.divergence.sinkhorn.tol = tr.at("sinkhorn_tol");
    c.train.divergence.n_projections = tr.at("n_projections");
    c.train.divergence.mmd_bandwidth = tr.at("mmd_bandwidth");
    c.train.batch_size = tr.at("batch_size");
    c.train.learning_rate = tr.at("learning_rate");
    c.train.iterations = tr.at("iterations");
    c.train.seed = tr.at("seed");
    c.eval.n_samples = j.at("eval").at("n_samples");
    c.eval.use_oracle = j.at("eval").at("use_oracle");
    c.output_dir = j.at("output_dir");
    return c;
}

}  // namespace

std::string RunConfig::canonical_text() const {
    // nlohmann orders object keys; dump(2) is the canonical form.
    return run_config_to_json(*this).dump(2) + "\n";
}

std::string RunConfig::hash() const { return fnv1a_hex(canonical_text()); }

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("config: cannot open " + path.string());
    json j;
    try {
        is >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error("config: parse error: " + std::string(e.what()));
    }
    return run_config_from_json(j);
}

void save_run_config(const RunConfig& cfg, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("config: cannot write " + path.string());
    os << cfg.canonical_text();
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string file_hash(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("hash: cannot open " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return fnv1a_hex(ss.str());
}

// ------------------------------------------------------------ image grids

void write_pgm(const std::filesystem::path& path, const Eigen::MatrixXd& image) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("pgm: cannot write " + path.string());
    os << "P5\n" << image.cols() << ' ' << image.rows() << "\n255\n";
    for (Eigen::Index i = 0; i < image.rows(); ++i)
        for (Eigen::Index j = 0; j < image.cols(); ++j) {
            const double v = std::min(1.0, std::max(0.0, image(i, j)));
            const unsigned char b = static_cast<unsigned char>(std::lround(v * 255.0));
            os.write(reinterpret_cast<const char*>(&b), 1);
        }
}

Eigen::MatrixXd read_pgm(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("pgm: cannot open " + path.string());
    std::string magic;
    int w = 0, h = 0, maxv = 0;
    is >> magic >> w >> h >> maxv;
    if (magic != "P5" || maxv != 255 || w < 1 || h < 1)
        throw std::runtime_error("pgm: unsupported header in " + path.string());
    is.get();  // single whitespace after header
    Eigen::MatrixXd img(h, w);
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j) {
            const int b = is.get();
            if (b < 0) throw std::runtime_error("pgm: truncated " + path.string());
            img(i, j) = b / 255.0;
        }
    return img;
}

void write_image_grid(const std::filesystem::path& path,
                      const std::vector<std::vector<Eigen::VectorXd>>& cells,
                      int height, int width, int padding) {
    if (cells.empty()) throw std::invalid_argument("image grid: no rows");
    const int rows = static_cast<int>(cells.size());
    const int cols = static_cast<int>(cells[0].size());
    Eigen::MatrixXd canvas = Eigen::MatrixXd::Ones(
        rows * height + (rows + 1) * padding, cols * width + (cols + 1) * padding);
    for (int r = 0; r < rows; ++r) {
        if (static_cast<int>(cells[r].size()) != cols)
            throw std::invalid_argument("image grid: ragged rows");
        for (int c = 0; c < cols; ++c) {
            const Eigen::VectorXd& cell = cells[r][c];
            if (cell.size() != static_cast<Eigen::Index>(height) * width)
                throw std::invalid_argument("image grid: cell size mismatch");
            const int y0 = padding + r * (height + padding);
            const int x0 = padding + c * (width + padding);
            for (int i = 0; i < height; ++i)
                for (int j = 0; j < width; ++j)
                    canvas(y0 + i, x0 + j) = cell[static_cast<Eigen::Index>(i) * width + j];
        }
    }
    write_pgm(path, canvas);
}

// ----------------------------------------------------------- array dumps

void write_array(const std::filesystem::path& path, const Eigen::MatrixXd& data,
                 std::uint64_t seed, const std::string& config_hash) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("array: cannot write " + path.string());
    os.write("PWAARR1\0", 8);
    write_u64(os, static_cast<std::uint64_t>(data.rows()));
    write_u64(os, static_cast<std::uint64_t>(data.cols()));
    write_u64(os, seed);
    write_u64(os, config_hash.size());
    os.write(config_hash.data(), static_cast<std::streamsize>(config_hash.size()));
    os.write(reinterpret_cast<const char*>(data.data()),
             static_cast<std::streamsize>(data.size() * sizeof(double)));
}

Eigen::MatrixXd read_array(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("array: cannot open " + path.string());
    char magic[8];
    if (!is.read(magic, 8) || std::memcmp(magic, "PWAARR1\0", 8) != 0)
        throw std::runtime_error("array: bad magic");
    const std::uint64_t rows = read_u64(is), cols = read_u64(is);
    read_u64(is);  // seed
    const std::uint64_t hlen = read_u64(is);
    is.seekg(static_cast<std::streamoff>(hlen), std::ios::cur);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    if (!is.read(reinterpret_cast<char*>(m.data()),
                 static_cast<std::streamsize>(m.size() * sizeof(double))))
        throw std::runtime_error("array: truncated payload");
    return m;
}

}  // namespace pwa
