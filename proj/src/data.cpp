#include "sphembed/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <numbers>

#include <json.hpp>

namespace sphembed {

namespace {

constexpr double kCenterAngleThreshold = 0.5; // radians
constexpr int kCenterRetries = 10000;

std::vector<double> random_unit(Rng &rng, int dim) {
    std::vector<double> v(dim);
    double sq = 0.0;
    do {
        sq = 0.0;
        for (int i = 0; i < dim; ++i) {
            v[i] = rng.normal(0.0, 1.0);
            sq += v[i] * v[i];
        }
    } while (sq == 0.0);
    const double inv = 1.0 / std::sqrt(sq);
    for (double &x : v)
        x *= inv;
    return v;
}

double bilinear(const Tensor &img, double y, double x, std::size_t c) {
    const auto h = static_cast<std::ptrdiff_t>(img.dim(0));
    const auto w = static_cast<std::ptrdiff_t>(img.dim(1));
    const std::ptrdiff_t y0 = static_cast<std::ptrdiff_t>(std::floor(y));
    const std::ptrdiff_t x0 = static_cast<std::ptrdiff_t>(std::floor(x));
    const double fy = y - static_cast<double>(y0);
    const double fx = x - static_cast<double>(x0);
    auto sample = [&](std::ptrdiff_t yy, std::ptrdiff_t xx) -> double {
        if (yy < 0 || yy >= h || xx < 0 || xx >= w)
            return 0.0; // zero fill outside the frame
        return img.data()[(yy * w + xx) * static_cast<std::ptrdiff_t>(
                              img.dim(2)) +
                          static_cast<std::ptrdiff_t>(c)];
    };
    return (1.0 - fy) * ((1.0 - fx) * sample(y0, x0) +
                         fx * sample(y0, x0 + 1)) +
           fy * ((1.0 - fx) * sample(y0 + 1, x0) +
                 fx * sample(y0 + 1, x0 + 1));
}

} // namespace

Dataset gen_gaussian_clusters(Rng &rng, int n_classes, int dim,
                              int samples_per_class, double center_separation,
                              double spread) {
    if (n_classes < 2)
        throw contract_error("gen_gaussian_clusters: need >= 2 classes");
    if (dim < 1 || samples_per_class < 1)
        throw contract_error("gen_gaussian_clusters: bad dimensions");
    if (!(center_separation > 0.0) || spread < 0.0)
        throw contract_error("gen_gaussian_clusters: bad separation/spread");

    std::vector<std::vector<double>> centers;
    for (int c = 0; c < n_classes; ++c) {
        std::vector<double> dir;
        bool ok = false;
        for (int attempt = 0; attempt < kCenterRetries && !ok; ++attempt) {
            dir = random_unit(rng, dim);
            ok = true;
            for (const auto &other : centers) {
                double dot = 0.0;
                for (int i = 0; i < dim; ++i)
                    dot += dir[i] * other[i];
                if (std::acos(std::clamp(dot, -1.0, 1.0)) <
                    kCenterAngleThreshold) {
                    ok = false;
                    break;
                }
            }
        }
        if (!ok)
            throw numeric_error("could not place well-separated centers in "
                                "this dimension");
        centers.push_back(std::move(dir));
    }

    Dataset ds;
    for (int c = 0; c < n_classes; ++c)
        ds.class_names.push_back("class-" + std::to_string(c));
    for (int c = 0; c < n_classes; ++c)
        for (int s = 0; s < samples_per_class; ++s) {
            Tensor sample({static_cast<std::size_t>(dim)});
            for (int i = 0; i < dim; ++i)
                sample[i] = centers[c][i] * center_separation +
                            rng.normal(0.0, spread);
            ds.samples.push_back(std::move(sample));
            ds.labels.push_back(c);
        }
    return ds;
}

Dataset load_dataset(const std::filesystem::path &manifest_path) {
    std::ifstream is(manifest_path);
    if (!is)
        throw contract_error("cannot open manifest " + manifest_path.string());
    nlohmann::json manifest = nlohmann::json::parse(is);

    Dataset ds;
    ds.class_names =
        manifest.at("class_names").get<std::vector<std::string>>();
    const double scale = manifest.value("scale", 1.0);
    const auto base = manifest_path.parent_path();

    const auto &samples = manifest.at("samples");
    if (samples.empty())
        std::cerr << "warning: manifest " << manifest_path
                  << " declares no samples\n";
    for (const auto &entry : samples) {
        const auto path = base / entry.at("path").get<std::string>();
        const Shape shape = entry.at("shape").get<Shape>();
        const int label = entry.at("label").get<int>();
        if (label < 0 || label >= ds.n_classes())
            throw contract_error("label " + std::to_string(label) +
                                 " out of range in " + path.string());
        const std::size_t count = shape_size(shape);
        std::ifstream fs(path, std::ios::binary);
        if (!fs)
            throw contract_error("missing tensor file " + path.string());
        std::vector<float> raw(count);
        fs.read(reinterpret_cast<char *>(raw.data()),
                static_cast<std::streamsize>(count * sizeof(float)));
        if (static_cast<std::size_t>(fs.gcount()) != count * sizeof(float) ||
            fs.peek() != std::ifstream::traits_type::eof())
            throw contract_error("tensor file " + path.string() +
                                 " does not match declared shape " +
                                 shape_str(shape));
        Tensor t(shape);
        for (std::size_t i = 0; i < count; ++i)
            t[i] = static_cast<double>(raw[i]) * scale;
        ds.samples.push_back(std::move(t));
        ds.labels.push_back(label);
    }
    return ds;
}

void save_dataset(const Dataset &dataset, const std::filesystem::path &dir,
                  double scale) {
    if (!(scale > 0.0))
        throw contract_error("save_dataset: scale must be positive");
    std::filesystem::create_directories(dir);
    nlohmann::json manifest;
    manifest["class_names"] = dataset.class_names;
    manifest["scale"] = scale;
    manifest["samples"] = nlohmann::json::array();
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "sample_%06zu.f32", i);
        const Tensor &t = dataset.samples[i];
        std::vector<float> raw(t.size());
        for (std::size_t j = 0; j < t.size(); ++j)
            raw[j] = static_cast<float>(t[j] / scale);
        std::ofstream fs(dir / name, std::ios::binary);
        fs.write(reinterpret_cast<const char *>(raw.data()),
                 static_cast<std::streamsize>(raw.size() * sizeof(float)));
        manifest["samples"].push_back({{"path", name},
                                       {"shape", t.shape()},
                                       {"label", dataset.labels[i]}});
    }
    std::ofstream os(dir / "manifest.json");
    os << manifest.dump(2) << "\n";
}

Tensor rotate_image(const Tensor &image, double degrees) {
    if (image.rank() != 3)
        throw contract_error("rotate_image expects an H×W×C image");
    const std::size_t h = image.dim(0), w = image.dim(1), c = image.dim(2);
    const double cy = (static_cast<double>(h) - 1.0) / 2.0;
    const double cx = (static_cast<double>(w) - 1.0) / 2.0;
    const double angle = degrees * std::numbers::pi / 180.0;
    const double ca = std::cos(angle), sa = std::sin(angle);

    Tensor rotated(image.shape());
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) {
            const double dy = static_cast<double>(y) - cy;
            const double dx = static_cast<double>(x) - cx;
            const double sy = cy + ca * dy + sa * dx;
            const double sx = cx - sa * dy + ca * dx;
            for (std::size_t ch = 0; ch < c; ++ch)
                rotated.data()[(y * w + x) * c + ch] =
                    bilinear(image, sy, sx, ch);
        }
    return rotated;
}

Tensor augment_sample(const Tensor &image, const AugmentConfig &config,
                      Rng &rng) {
    if (image.rank() != 3)
        throw contract_error("augment_sample expects an H×W×C image");
    const std::size_t h = image.dim(0), w = image.dim(1), c = image.dim(2);
    const double cy = (static_cast<double>(h) - 1.0) / 2.0;
    const double cx = (static_cast<double>(w) - 1.0) / 2.0;

    // draw all randomness up front so the stream layout is fixed
    const double angle_deg =
        rng.uniform(-config.rotation_deg, config.rotation_deg);
    const double delta = rng.uniform(-config.brightness, config.brightness);
    const bool flip = rng.uniform() < config.flip_prob;
    const double zoom = rng.uniform(1.0, 1.0 + config.zoom);

    Tensor rotated = rotate_image(image, angle_deg);

    for (std::size_t i = 0; i < rotated.size(); ++i)
        rotated[i] = std::clamp(rotated[i] + delta, 0.0, 1.0);

    if (flip) {
        Tensor flipped(rotated.shape());
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x)
                for (std::size_t ch = 0; ch < c; ++ch)
                    flipped.data()[(y * w + x) * c + ch] =
                        rotated.data()[(y * w + (w - 1 - x)) * c + ch];
        rotated = std::move(flipped);
    }

    if (zoom > 1.0) {
        Tensor zoomed(rotated.shape());
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x) {
                const double sy = cy + (static_cast<double>(y) - cy) / zoom;
                const double sx = cx + (static_cast<double>(x) - cx) / zoom;
                for (std::size_t ch = 0; ch < c; ++ch)
                    zoomed.data()[(y * w + x) * c + ch] =
                        bilinear(rotated, sy, sx, ch);
            }
        rotated = std::move(zoomed);
    }

    for (std::size_t i = 0; i < rotated.size(); ++i)
        rotated[i] = std::clamp(rotated[i], 0.0, 1.0);
    return rotated;
}

std::pair<Dataset, Dataset> stratified_split(const Dataset &dataset,
                                             double train_fraction, Rng &rng) {
    if (!(train_fraction > 0.0) || !(train_fraction < 1.0))
        throw contract_error("train_fraction must be in (0, 1)");
    const int nc = dataset.n_classes();
    std::vector<std::vector<std::size_t>> by_class(nc);
    for (std::size_t i = 0; i < dataset.size(); ++i)
        by_class.at(dataset.labels[i]).push_back(i);

    Dataset train, test;
    train.class_names = dataset.class_names;
    test.class_names = dataset.class_names;
    for (int c = 0; c < nc; ++c) {
        auto &idx = by_class[c];
        for (std::size_t i = idx.size(); i > 1; --i)
            std::swap(idx[i - 1], idx[rng.uniform_index(i)]);
        // epsilon guard so e.g. 0.7 × 930 floors to 651, not 650
        const std::size_t n_train = static_cast<std::size_t>(std::floor(
            train_fraction * static_cast<double>(idx.size()) + 1e-9));
        if (n_train == 0 || n_train == idx.size())
            throw contract_error("class " + std::to_string(c) +
                                 " would get an empty train or test part");
        for (std::size_t i = 0; i < idx.size(); ++i) {
            Dataset &dst = i < n_train ? train : test;
            dst.samples.push_back(dataset.samples[idx[i]]);
            dst.labels.push_back(c);
        }
    }
    return {std::move(train), std::move(test)};
}

} // namespace sphembed
