#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "grasplab/tensor.hpp"

namespace grasplab {

struct DualLabelSample {
    Tensor image;  // (C,H,W), pixel values in [0,255]
    std::string object_id;
    std::size_t category = 0;
    std::optional<std::size_t> grasp;  // nullopt = missing label
};

struct Dataset {
    std::vector<DualLabelSample> samples;
    std::size_t num_categories = 0;
    std::size_t num_grasps = 0;
    std::vector<std::string> category_names;  // optional display names
    std::vector<std::string> grasp_names;

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
};

enum class Protocol { wwc, boc, ocs };

std::string protocol_name(Protocol p);
Protocol protocol_from_name(const std::string& name);

struct DatasetSplit {
    Dataset train;
    Dataset validation;
    Dataset test;
    std::uint64_t seed = 0;
    Protocol protocol = Protocol::wwc;
    std::vector<std::string> warnings;
};

enum class Branch { category, grasp };
enum class NormMode { standardize, as_written };

struct NormResult {
    Tensor image;
    std::vector<std::size_t> degenerate_channels;
};

// Category branch: x / 255. Grasp branch: per-channel standardization
// (population std) by default, or the literal sum/(N+M) variant in
// as_written mode; a degenerate channel maps to zeros and is flagged.
NormResult normalize_image(const Tensor& x, Branch branch,
                           NormMode mode = NormMode::standardize);

// Sample-level 8:1:1 split.
DatasetSplit split_wwc(const Dataset& dataset, std::uint64_t seed);

// Object-level split: ~10% of object ids to test, remaining objects 9:1
// train/validation. No object id crosses the test boundary.
DatasetSplit split_boc(const Dataset& dataset, std::uint64_t seed);

// Object-category-based sampling: per category with m objects, keep grasp
// labels on min(m, n) objects; when m > n, mask m-n-1 objects and hold out
// one for test. Pooled objects split 9:1 train/validation.
DatasetSplit split_ocs(const Dataset& dataset, std::size_t n_labeled, std::uint64_t seed);

// Exactly round(p * L) of the L grasp-labeled samples keep their labels.
Dataset mask_grasp_labels(const Dataset& dataset, double p, std::uint64_t seed);

struct SynthConfig {
    std::size_t num_categories = 8;
    std::size_t num_grasps = 3;
    std::size_t objects_per_category = 10;
    std::size_t views_per_object = 20;
    std::size_t channels = 1;
    std::size_t height = 16;
    std::size_t width = 16;
    double noise_level = 8.0;    // per-view pixel noise, in [0,255] units
    double object_scale = 20.0;  // amplitude of the per-object contaminating wave
    double phase_jitter = 1.2;   // per-object phase spread of the category wave, radians
    std::vector<std::size_t> category_to_grasp;  // empty = cat % num_grasps
    std::uint64_t seed = 0;

    std::vector<std::size_t> grasp_map() const;
    void validate() const;
};

// Seeded synthetic dual-label imagery: a low-frequency base pattern per
// category, a weaker per-object offset, Gaussian pixel noise per view.
// Grasp label = map(category).
Dataset synth_generate(const SynthConfig& cfg);

// Raw little-endian tensor container used for stored images.
void save_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor load_tensor(const std::filesystem::path& path);

// CSV manifest (header: path,object_id,category,grasp; "-" = missing grasp).
// Images may be .ten containers or binary/ascii PGM/PPM; when target dims
// are given, images are bilinearly resized (channel counts must match).
Dataset load_manifest(const std::filesystem::path& manifest_path,
                      std::optional<std::vector<std::size_t>> target_shape = std::nullopt);

// Writes dir/images/*.ten, dir/manifest.csv and dir/dataset.json.
void save_dataset(const Dataset& dataset, const std::filesystem::path& dir);

Tensor resize_bilinear(const Tensor& image, std::size_t out_h, std::size_t out_w);

std::string dataset_summary_json(const Dataset& dataset);

}  // namespace grasplab
