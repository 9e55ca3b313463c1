#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "spamnet/rng.hpp"
#include "spamnet/tensor.hpp"

namespace spamnet {

// Decoded 8-bit RGB grid, row-major, interleaved channels (H x W x 3).
struct RawImage {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<std::uint8_t> pixels;
};

enum class ImageFormat { png, jpeg, ppm, unknown };

struct DecodeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

ImageFormat detect_format(const std::vector<std::uint8_t>& bytes);
RawImage decode_image(const std::vector<std::uint8_t>& bytes, ImageFormat format);
RawImage decode_image_auto(const std::vector<std::uint8_t>& bytes);

// Half-pixel-centered bilinear resampling to 56x56; a 56x56 input passes
// through unchanged.
RawImage resize_bilinear(const RawImage& src, std::size_t out_h = 56,
                         std::size_t out_w = 56);

// u8 HWC -> f32 CHW, values scaled to [0,1].
Tensor normalize(const RawImage& img);

struct LabeledImage {
    Tensor pixels;  // [3,56,56]
    int label = 0;  // spam = 1, ham = 0
    std::string source_id;
};

enum class SplitTag { all, train, test };

struct Dataset {
    std::vector<LabeledImage> samples;
    SplitTag split_tag = SplitTag::all;
    std::uint64_t seed = 0;
    std::size_t skipped_files = 0;  // undecodable inputs dropped on load

    std::size_t count_label(int label) const;
};

// Loads `root/spam` and `root/ham` (sorted filename order), decoding every
// readable image to a 3x56x56 sample. Undecodable files are skipped and
// counted. Throws if a class directory is missing or nothing decodes.
Dataset load_directory(const std::string& root);

// Per-class seeded shuffle, floor(train_fraction * n) to train, rest to
// test. Disjoint and exhaustive by construction.
std::pair<Dataset, Dataset> stratified_split(const Dataset& ds,
                                             double train_fraction,
                                             std::uint64_t seed);

struct Batch {
    Tensor images;  // [B,3,56,56]
    Tensor labels;  // [B,1]
};

// Seeded shuffle then contiguous slices; the final partial batch is kept.
std::vector<Batch> batches(const Dataset& ds, std::size_t batch_size, Rng& rng);

// Order-independent digest of the test-split membership (sorted source ids),
// used to confirm that separate commands worked the same split.
std::uint64_t split_membership_hash(const Dataset& ds);

struct SynthStats {
    std::size_t spam_written = 0;
    std::size_t ham_written = 0;
    std::string manifest_path;
};

// Writes a deterministic corpus of flat-background bar images (spam) and
// smooth multi-gradient images (ham) as P6 PPM files plus a manifest with
// one "path label seed" line per file. Pure function of (counts, seed).
SynthStats generate_synthetic_corpus(std::size_t n_spam, std::size_t n_ham,
                                     std::uint64_t seed,
                                     const std::string& out_dir);

// PPM bytes for one image; exposed for tests and the generator.
std::vector<std::uint8_t> encode_ppm(const RawImage& img);

}  // namespace spamnet
