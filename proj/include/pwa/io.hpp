#ifndef PWA_IO_HPP
#define PWA_IO_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pwa/model.hpp"
#include "pwa/objective.hpp"
#include "pwa/tasks.hpp"

namespace pwa {

// ------------------------------------------------------------------- IDX

enum class IdxErrorKind { bad_magic, truncated, dimension_overflow, io };

class IdxError : public std::runtime_error {
public:
    IdxError(IdxErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}
    IdxErrorKind kind() const { return kind_; }

private:
    IdxErrorKind kind_;
};

struct IdxImages {
    Eigen::MatrixXd data;  // n x (h*w), values scaled to [0,1]
    int count = 0;
    int height = 0;
    int width = 0;
};

// Big-endian IDX image file (magic 0x00000803, uint8 payload).
IdxImages load_idx_images(const std::filesystem::path& path);
void write_idx_images(const std::filesystem::path& path, const Eigen::MatrixXd& data,
                      int height, int width);

std::vector<int> load_idx_labels(const std::filesystem::path& path);

// ------------------------------------------------------------ checkpoints

// Single binary archive: manifest (architecture, split, task id, config
// hash, seed) followed by the flat parameter and state arrays. Round
// trips are bit-exact.
void save_checkpoint(PairedModel& model, const std::filesystem::path& path,
                     const std::string& task_id, const std::string& config_hash,
                     std::uint64_t seed);

struct Checkpoint {
    PairedModel model;
    std::string task_id;
    std::string config_hash;
    std::uint64_t seed = 0;
};

Checkpoint load_checkpoint(const std::filesystem::path& path);

// ----------------------------------------------------------------- config

struct EvalConfig {
    int n_samples = 512;
    bool use_oracle = true;
};

struct RunConfig {
    TaskSpec task;
    ArchitectureSpec arch1, arch2;
    LatentSplit split{16, 16, 16};
    TrainConfig train;
    EvalConfig eval;
    std::string output_dir = "out";

    // Canonical JSON text; its hash stamps every emitted artifact.
    std::string canonical_text() const;
    std::string hash() const;
};

RunConfig load_run_config(const std::filesystem::path& path);
void save_run_config(const RunConfig& cfg, const std::filesystem::path& path);

// FNV-1a 64-bit hex digest.
std::string fnv1a_hex(const std::string& bytes);
std::string file_hash(const std::filesystem::path& path);

// ------------------------------------------------------------ image grids

// Lossless 8-bit PGM; values clamped to [0,1].
void write_pgm(const std::filesystem::path& path, const Eigen::MatrixXd& image);
Eigen::MatrixXd read_pgm(const std::filesystem::path& path);

// Tiles row-major: cells[r][c] are flattened h x w images.
void write_image_grid(const std::filesystem::path& path,
                      const std::vector<std::vector<Eigen::VectorXd>>& cells,
                      int height, int width, int padding = 2);

// Flat binary array dump with a small header (dtype, shape, seed, hash).
void write_array(const std::filesystem::path& path, const Eigen::MatrixXd& data,
                 std::uint64_t seed, const std::string& config_hash);
Eigen::MatrixXd read_array(const std::filesystem::path& path);

}  // namespace pwa

#endif
