#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "sphembed/rng.hpp"
#include "sphembed/tensor.hpp"

namespace sphembed {

struct Dataset {
    std::vector<Tensor> samples; // vectors (d) or images (H×W×C)
    std::vector<int> labels;
    std::vector<std::string> class_names;

    std::size_t size() const { return samples.size(); }
    int n_classes() const { return static_cast<int>(class_names.size()); }
};

struct AugmentConfig {
    double rotation_deg = 15.0;
    double brightness = 0.1;
    double flip_prob = 0.5;
    double zoom = 0.1; // zoom-in factor drawn from [1, 1+zoom]
};

/// Well-separated unit-direction class centers plus isotropic noise.
/// Centers are resampled until every pairwise angle clears a threshold.
Dataset gen_gaussian_clusters(Rng &rng, int n_classes, int dim,
                              int samples_per_class, double center_separation,
                              double spread);

/// JSON manifest {class_names, scale, samples:[{path, shape, label}]}
/// referencing raw little-endian float32 files, row-major, headerless.
/// Values are multiplied by `scale` on load.
Dataset load_dataset(const std::filesystem::path &manifest_path);

/// Writes a dataset in the manifest + raw-tensor format above.
void save_dataset(const Dataset &dataset, const std::filesystem::path &dir,
                  double scale = 1.0);

/// Rotation about the image center by a fixed angle, bilinear
/// resampling with zero fill outside the frame.
Tensor rotate_image(const Tensor &image, double degrees);

/// Rotation → brightness shift → horizontal flip → zoom-in, in order.
/// Bilinear resampling with zero fill; output stays in [0,1].
Tensor augment_sample(const Tensor &image, const AugmentConfig &config,
                      Rng &rng);

/// Per-class shuffle then split; train count = floor(fraction · size).
std::pair<Dataset, Dataset> stratified_split(const Dataset &dataset,
                                             double train_fraction, Rng &rng);

} // namespace sphembed
