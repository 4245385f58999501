#include "grasplab/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

namespace grasplab {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0,
                       std::uint64_t d = 0) {
    return splitmix64(splitmix64(splitmix64(splitmix64(a) ^ b) ^ c) ^ d);
}

// Distinct object ids in first-appearance order, with their sample indices.
struct ObjectIndex {
    std::vector<std::string> ids;
    std::unordered_map<std::string, std::vector<std::size_t>> samples_of;
    std::unordered_map<std::string, std::size_t> category_of;
};

ObjectIndex index_objects(const Dataset& dataset) {
    ObjectIndex idx;
    for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
        const auto& s = dataset.samples[i];
        auto it = idx.samples_of.find(s.object_id);
        if (it == idx.samples_of.end()) {
            idx.ids.push_back(s.object_id);
            idx.samples_of[s.object_id] = {i};
            idx.category_of[s.object_id] = s.category;
        } else {
            it->second.push_back(i);
        }
    }
    return idx;
}

Dataset subset(const Dataset& dataset, const std::vector<std::size_t>& indices) {
    Dataset out;
    out.num_categories = dataset.num_categories;
    out.num_grasps = dataset.num_grasps;
    out.category_names = dataset.category_names;
    out.grasp_names = dataset.grasp_names;
    out.samples.reserve(indices.size());
    for (std::size_t i : indices) out.samples.push_back(dataset.samples[i]);
    return out;
}

std::size_t round_count(double x) { return static_cast<std::size_t>(std::llround(x)); }

}  // namespace

std::string protocol_name(Protocol p) {
    switch (p) {
        case Protocol::wwc: return "wwc";
        case Protocol::boc: return "boc";
        case Protocol::ocs: return "ocs";
    }
    return "wwc";
}

Protocol protocol_from_name(const std::string& name) {
    if (name == "wwc") return Protocol::wwc;
    if (name == "boc") return Protocol::boc;
    if (name == "ocs") return Protocol::ocs;
    throw ConfigError("unknown protocol: " + name);
}

NormResult normalize_image(const Tensor& x, Branch branch, NormMode mode) {
    x.check_finite();
    if (branch == Branch::category) {
        Tensor out(x.shape());
        for (std::size_t i = 0; i < x.numel(); ++i) out[i] = x[i] / 255.0;
        return {std::move(out), {}};
    }
    if (x.ndim() != 3) {
        throw DimensionError("normalize_image: expected (C,H,W), got " + x.shape_str());
    }
    const std::size_t C = x.dim(0), H = x.dim(1), W = x.dim(2);
    const std::size_t hw = H * W;
    NormResult res;
    res.image = Tensor(x.shape());
    for (std::size_t c = 0; c < C; ++c) {
        const double* src = x.data() + c * hw;
        double* dst = res.image.data() + c * hw;
        double total = 0.0;
        for (std::size_t i = 0; i < hw; ++i) total += src[i];
        double center = 0.0, scale = 0.0;
        if (mode == NormMode::standardize) {
            center = total / static_cast<double>(hw);
            double var = 0.0;
            for (std::size_t i = 0; i < hw; ++i) {
                const double d = src[i] - center;
                var += d * d;
            }
            scale = std::sqrt(var / static_cast<double>(hw));
        } else {
            // literal form: divide by N+M, no square on the deviation
            const double nm = static_cast<double>(H + W);
            center = total / nm;
            double dev = 0.0;
            for (std::size_t i = 0; i < hw; ++i) dev += src[i] - center;
            scale = std::sqrt(dev / nm);
        }
        const double degenerate_eps = 1e-12 * std::max(1.0, std::fabs(center));
        if (!std::isfinite(scale) || scale <= degenerate_eps) {
            for (std::size_t i = 0; i < hw; ++i) dst[i] = 0.0;
            res.degenerate_channels.push_back(c);
        } else {
            for (std::size_t i = 0; i < hw; ++i) dst[i] = (src[i] - center) / scale;
        }
    }
    return res;
}

DatasetSplit split_wwc(const Dataset& dataset, std::uint64_t seed) {
    const std::size_t n = dataset.size();
    if (n < 10) {
        throw ConfigError("split_wwc: need at least 10 samples, got " + std::to_string(n));
    }
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::mt19937_64 rng(mix_seed(seed, 0x7777));
    std::shuffle(order.begin(), order.end(), rng);

    const std::size_t n_test = std::max<std::size_t>(1, n / 10);
    const std::size_t n_val = std::max<std::size_t>(1, round_count(n * 0.1));
    const std::size_t n_train = n - n_test - n_val;

    DatasetSplit out;
    out.seed = seed;
    out.protocol = Protocol::wwc;
    out.train = subset(dataset, {order.begin(), order.begin() + n_train});
    out.validation =
        subset(dataset, {order.begin() + n_train, order.begin() + n_train + n_val});
    out.test = subset(dataset, {order.begin() + n_train + n_val, order.end()});
    return out;
}

DatasetSplit split_boc(const Dataset& dataset, std::uint64_t seed) {
    ObjectIndex idx = index_objects(dataset);
    const std::size_t n_obj = idx.ids.size();
    if (n_obj < 3) {
        throw ConfigError("split_boc: need at least 3 distinct objects, got " +
                          std::to_string(n_obj));
    }
    std::vector<std::string> order = idx.ids;
    std::mt19937_64 rng(mix_seed(seed, 0xb0c));
    std::shuffle(order.begin(), order.end(), rng);

    const std::size_t n_test = std::max<std::size_t>(1, n_obj / 10);
    const std::size_t remaining = n_obj - n_test;
    std::size_t n_val = std::max<std::size_t>(1, round_count(remaining * 0.1));
    if (n_val >= remaining) n_val = remaining - 1;

    std::vector<std::size_t> train_idx, val_idx, test_idx;
    for (std::size_t k = 0; k < n_obj; ++k) {
        const auto& samples = idx.samples_of[order[k]];
        auto& dst = (k < n_test) ? test_idx : (k < n_test + n_val ? val_idx : train_idx);
        dst.insert(dst.end(), samples.begin(), samples.end());
    }
    DatasetSplit out;
    out.seed = seed;
    out.protocol = Protocol::boc;
    out.train = subset(dataset, train_idx);
    out.validation = subset(dataset, val_idx);
    out.test = subset(dataset, test_idx);
    return out;
}

DatasetSplit split_ocs(const Dataset& dataset, std::size_t n_labeled, std::uint64_t seed) {
    if (n_labeled < 1) throw ConfigError("split_ocs: n must be >= 1");
    ObjectIndex idx = index_objects(dataset);

    DatasetSplit out;
    out.seed = seed;
    out.protocol = Protocol::ocs;

    // category -> objects, first-appearance order
    std::vector<std::vector<std::string>> by_category(dataset.num_categories);
    for (const auto& id : idx.ids) {
        const std::size_t cat = idx.category_of[id];
        if (cat >= by_category.size()) by_category.resize(cat + 1);
        by_category[cat].push_back(id);
    }

    std::vector<std::string> pool;  // training + validation objects
    std::unordered_set<std::string> masked;
    std::vector<std::size_t> test_idx;
    for (std::size_t cat = 0; cat < by_category.size(); ++cat) {
        auto objs = by_category[cat];
        if (objs.empty()) {
            out.warnings.push_back("ocs: category " + std::to_string(cat) + " has no objects");
            continue;
        }
        const std::size_t m = objs.size();
        if (m <= n_labeled) {
            for (auto& id : objs) pool.push_back(id);
            continue;
        }
        std::mt19937_64 rng(mix_seed(seed, 0x0c5, cat));
        std::shuffle(objs.begin(), objs.end(), rng);
        for (std::size_t k = 0; k < m; ++k) {
            if (k < n_labeled) {
                pool.push_back(objs[k]);
            } else if (k + 1 < m) {
                masked.insert(objs[k]);
                pool.push_back(objs[k]);
            } else {
                const auto& samples = idx.samples_of[objs[k]];
                test_idx.insert(test_idx.end(), samples.begin(), samples.end());
            }
        }
    }

    std::mt19937_64 rng(mix_seed(seed, 0x0c5, 0xffffffffULL));
    std::shuffle(pool.begin(), pool.end(), rng);
    std::size_t n_val = pool.size() >= 2 ? std::max<std::size_t>(1, round_count(pool.size() * 0.1))
                                         : 0;
    if (n_val >= pool.size() && !pool.empty()) n_val = pool.size() - 1;

    std::vector<std::size_t> train_idx, val_idx;
    for (std::size_t k = 0; k < pool.size(); ++k) {
        const auto& samples = idx.samples_of[pool[k]];
        auto& dst = (k < n_val) ? val_idx : train_idx;
        dst.insert(dst.end(), samples.begin(), samples.end());
    }

    out.train = subset(dataset, train_idx);
    out.validation = subset(dataset, val_idx);
    out.test = subset(dataset, test_idx);
    for (auto* part : {&out.train, &out.validation}) {
        for (auto& s : part->samples) {
            if (masked.count(s.object_id)) s.grasp.reset();
        }
    }
    return out;
}

Dataset mask_grasp_labels(const Dataset& dataset, double p, std::uint64_t seed) {
    if (p < 0.0 || p > 1.0) {
        throw ContractError("mask_grasp_labels: p = " + std::to_string(p) + " outside [0,1]");
    }
    Dataset out = dataset;
    std::vector<std::size_t> labeled;
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
        if (out.samples[i].grasp.has_value()) labeled.push_back(i);
    }
    const std::size_t keep = round_count(p * static_cast<double>(labeled.size()));
    if (keep >= labeled.size()) return out;  // p = 1: identity
    std::mt19937_64 rng(mix_seed(seed, 0x3a5c));
    std::shuffle(labeled.begin(), labeled.end(), rng);
    for (std::size_t k = keep; k < labeled.size(); ++k) out.samples[labeled[k]].grasp.reset();
    return out;
}

std::vector<std::size_t> SynthConfig::grasp_map() const {
    if (!category_to_grasp.empty()) return category_to_grasp;
    std::vector<std::size_t> map(num_categories);
    for (std::size_t c = 0; c < num_categories; ++c) map[c] = c % num_grasps;
    return map;
}

void SynthConfig::validate() const {
    if (num_categories == 0 || num_grasps == 0 || objects_per_category == 0 ||
        views_per_object == 0 || channels == 0 || height == 0 || width == 0) {
        throw ConfigError("synth config: all counts must be positive");
    }
    if (!category_to_grasp.empty()) {
        if (category_to_grasp.size() != num_categories) {
            throw ConfigError("synth config: category_to_grasp must cover every category");
        }
        for (std::size_t g : category_to_grasp) {
            if (g >= num_grasps) {
                throw ConfigError("synth config: grasp index " + std::to_string(g) +
                                  " out of range");
            }
        }
    }
}

namespace {

// One plane wave at the given frequency pair. Category identity lives in the
// frequency slot; the phase is an object-level nuisance, so recognizing a
// category on an unseen object requires slot energy, not template matching.
Tensor plane_wave(std::size_t fx, std::size_t fy, double phase, std::size_t channels,
                  std::size_t height, std::size_t width) {
    const double tau = 2.0 * 3.14159265358979323846;
    Tensor out({channels, height, width});
    for (std::size_t c = 0; c < channels; ++c) {
        const double cshift = static_cast<double>(c) * 0.7;
        for (std::size_t y = 0; y < height; ++y) {
            for (std::size_t x = 0; x < width; ++x) {
                out[(c * height + y) * width + x] =
                    std::sin(tau * (static_cast<double>(fx) * static_cast<double>(x) /
                                        static_cast<double>(width) +
                                    static_cast<double>(fy) * static_cast<double>(y) /
                                        static_cast<double>(height)) +
                             phase + cshift);
            }
        }
    }
    return out;
}

}  // namespace

Dataset synth_generate(const SynthConfig& cfg) {
    cfg.validate();
    const auto map = cfg.grasp_map();
    Dataset out;
    out.num_categories = cfg.num_categories;
    out.num_grasps = cfg.num_grasps;
    out.samples.reserve(cfg.num_categories * cfg.objects_per_category * cfg.views_per_object);

    // Dominant frequency pairs are a seeded permutation of a 4x4 grid, so the
    // visual structure of a category is independent of its grasp label.
    std::vector<std::size_t> freq_slots(16);
    for (std::size_t i = 0; i < 16; ++i) freq_slots[i] = i;
    {
        std::mt19937_64 rng(mix_seed(cfg.seed, 0xf4e9));
        std::shuffle(freq_slots.begin(), freq_slots.end(), rng);
    }

    const double tau = 2.0 * 3.14159265358979323846;
    for (std::size_t cat = 0; cat < cfg.num_categories; ++cat) {
        const std::size_t slot = freq_slots[cat % 16];
        const std::size_t fx = 1 + slot % 4;
        const std::size_t fy = 1 + slot / 4;
        std::mt19937_64 cat_rng(mix_seed(cfg.seed, 0xca7, cat));
        std::uniform_real_distribution<double> anchor_dist(0.0, tau);
        const double anchor_phase = anchor_dist(cat_rng);
        for (std::size_t obj = 0; obj < cfg.objects_per_category; ++obj) {
            // the category wave's phase jitters per object and the image picks
            // up a contaminating wave at some other grid slot: unseen objects
            // carry unseen phases and contaminations
            std::mt19937_64 obj_rng(mix_seed(cfg.seed, 0x0b1, cat, obj));
            std::uniform_real_distribution<double> jitter_dist(-cfg.phase_jitter, cfg.phase_jitter);
            std::uniform_real_distribution<double> phase_dist(0.0, tau);
            std::uniform_int_distribution<std::size_t> slot_dist(0, 15);
            const Tensor base = plane_wave(fx, fy, anchor_phase + jitter_dist(obj_rng),
                                           cfg.channels, cfg.height, cfg.width);
            const std::size_t oslot = slot_dist(obj_rng);
            const Tensor contamination =
                plane_wave(1 + oslot % 4, 1 + oslot / 4, phase_dist(obj_rng), cfg.channels,
                           cfg.height, cfg.width);
            Tensor tmpl({cfg.channels, cfg.height, cfg.width});
            for (std::size_t i = 0; i < tmpl.numel(); ++i) {
                tmpl[i] = 128.0 + 55.0 * base[i] + cfg.object_scale * contamination[i];
            }
            const std::string id = "c" + std::to_string(cat) + "_o" + std::to_string(obj);
            for (std::size_t view = 0; view < cfg.views_per_object; ++view) {
                std::mt19937_64 view_rng(mix_seed(cfg.seed, 0x71e3, cat * 1000 + obj, view));
                std::normal_distribution<double> noise(0.0, 1.0);
                DualLabelSample s;
                s.image = Tensor({cfg.channels, cfg.height, cfg.width});
                for (std::size_t i = 0; i < s.image.numel(); ++i) {
                    const double v = tmpl[i] + cfg.noise_level * noise(view_rng);
                    s.image[i] = std::clamp(v, 0.0, 255.0);
                }
                s.object_id = id;
                s.category = cat;
                s.grasp = map[cat];
                out.samples.push_back(std::move(s));
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Storage
// ---------------------------------------------------------------------------

namespace {
constexpr char kTensorMagic[8] = {'G', 'L', 'A', 'B', 'T', 'E', 'N', '1'};
}

void save_tensor(const std::filesystem::path& path, const Tensor& t) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("save_tensor: cannot open " + path.string());
    os.write(kTensorMagic, 8);
    const std::uint32_t ndim = static_cast<std::uint32_t>(t.ndim());
    os.write(reinterpret_cast<const char*>(&ndim), sizeof ndim);
    for (std::size_t i = 0; i < t.ndim(); ++i) {
        const std::uint64_t d = t.dim(i);
        os.write(reinterpret_cast<const char*>(&d), sizeof d);
    }
    os.write(reinterpret_cast<const char*>(t.data()),
             static_cast<std::streamsize>(t.numel() * sizeof(double)));
    if (!os) throw ConfigError("save_tensor: write failed for " + path.string());
}

Tensor load_tensor(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("load_tensor: cannot open " + path.string());
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kTensorMagic, 8) != 0) {
        throw ConfigError("load_tensor: bad magic in " + path.string());
    }
    std::uint32_t ndim = 0;
    is.read(reinterpret_cast<char*>(&ndim), sizeof ndim);
    if (!is || ndim > 8) throw ConfigError("load_tensor: bad rank in " + path.string());
    std::vector<std::size_t> shape(ndim);
    for (auto& d : shape) {
        std::uint64_t v = 0;
        is.read(reinterpret_cast<char*>(&v), sizeof v);
        d = static_cast<std::size_t>(v);
    }
    Tensor t(shape);
    is.read(reinterpret_cast<char*>(t.data()),
            static_cast<std::streamsize>(t.numel() * sizeof(double)));
    if (!is) throw ConfigError("load_tensor: truncated file " + path.string());
    if (verification_mode()) t.check_finite();
    return t;
}

namespace {

int next_pnm_value(std::istream& is) {
    // skips whitespace and # comments
    while (true) {
        int ch = is.peek();
        if (ch == '#') {
            std::string line;
            std::getline(is, line);
        } else if (std::isspace(ch)) {
            is.get();
        } else {
            break;
        }
    }
    int v = -1;
    is >> v;
    return v;
}

Tensor load_pnm(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("load_pnm: cannot open " + path.string());
    std::string magic;
    is >> magic;
    const bool ascii = (magic == "P2" || magic == "P3");
    const bool binary = (magic == "P5" || magic == "P6");
    if (!ascii && !binary) throw ConfigError("load_pnm: unsupported format " + magic);
    const std::size_t channels = (magic == "P3" || magic == "P6") ? 3 : 1;
    const int w = next_pnm_value(is);
    const int h = next_pnm_value(is);
    const int maxval = next_pnm_value(is);
    if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255) {
        throw ConfigError("load_pnm: bad header in " + path.string());
    }
    const std::size_t H = static_cast<std::size_t>(h), W = static_cast<std::size_t>(w);
    Tensor out({channels, H, W});
    if (binary) {
        is.get();  // single whitespace after maxval
        std::vector<unsigned char> raw(channels * H * W);
        is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
        if (!is) throw ConfigError("load_pnm: truncated data in " + path.string());
        for (std::size_t y = 0; y < H; ++y)
            for (std::size_t x = 0; x < W; ++x)
                for (std::size_t c = 0; c < channels; ++c)
                    out[(c * H + y) * W + x] =
                        static_cast<double>(raw[(y * W + x) * channels + c]);
    } else {
        for (std::size_t y = 0; y < H; ++y) {
            for (std::size_t x = 0; x < W; ++x) {
                for (std::size_t c = 0; c < channels; ++c) {
                    const int v = next_pnm_value(is);
                    if (v < 0) throw ConfigError("load_pnm: truncated data in " + path.string());
                    out[(c * H + y) * W + x] = static_cast<double>(v);
                }
            }
        }
    }
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace

Tensor resize_bilinear(const Tensor& image, std::size_t out_h, std::size_t out_w) {
    if (image.ndim() != 3) {
        throw DimensionError("resize_bilinear: expected (C,H,W), got " + image.shape_str());
    }
    const std::size_t C = image.dim(0), H = image.dim(1), W = image.dim(2);
    if (H == out_h && W == out_w) return image;
    Tensor out({C, out_h, out_w});
    const double sy = static_cast<double>(H) / static_cast<double>(out_h);
    const double sx = static_cast<double>(W) / static_cast<double>(out_w);
    for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t y = 0; y < out_h; ++y) {
            double fy = (static_cast<double>(y) + 0.5) * sy - 0.5;
            fy = std::clamp(fy, 0.0, static_cast<double>(H - 1));
            const std::size_t y0 = static_cast<std::size_t>(fy);
            const std::size_t y1 = std::min(y0 + 1, H - 1);
            const double wy = fy - static_cast<double>(y0);
            for (std::size_t x = 0; x < out_w; ++x) {
                double fx = (static_cast<double>(x) + 0.5) * sx - 0.5;
                fx = std::clamp(fx, 0.0, static_cast<double>(W - 1));
                const std::size_t x0 = static_cast<std::size_t>(fx);
                const std::size_t x1 = std::min(x0 + 1, W - 1);
                const double wx = fx - static_cast<double>(x0);
                const double v00 = image[(c * H + y0) * W + x0];
                const double v01 = image[(c * H + y0) * W + x1];
                const double v10 = image[(c * H + y1) * W + x0];
                const double v11 = image[(c * H + y1) * W + x1];
                out[(c * out_h + y) * out_w + x] = (1 - wy) * ((1 - wx) * v00 + wx * v01) +
                                                   wy * ((1 - wx) * v10 + wx * v11);
            }
        }
    }
    return out;
}

Dataset load_manifest(const std::filesystem::path& manifest_path,
                      std::optional<std::vector<std::size_t>> target_shape) {
    std::ifstream is(manifest_path);
    if (!is) throw ConfigError("load_manifest: cannot open " + manifest_path.string());
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("load_manifest: empty manifest");
    if (split_csv_line(line) != std::vector<std::string>{"path", "object_id", "category",
                                                         "grasp"}) {
        throw ConfigError("load_manifest: expected header path,object_id,category,grasp");
    }
    const auto base = manifest_path.parent_path();
    Dataset out;
    std::size_t row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 4) {
            throw ConfigError("load_manifest: row " + std::to_string(row) +
                              ": expected 4 fields");
        }
        DualLabelSample s;
        s.object_id = fields[1];
        try {
            s.category = std::stoul(fields[2]);
            if (fields[3] != "-") s.grasp = std::stoul(fields[3]);
        } catch (const std::exception&) {
            throw ConfigError("load_manifest: row " + std::to_string(row) + ": bad label");
        }
        const auto img_path = base / fields[0];
        try {
            if (img_path.extension() == ".ten") {
                s.image = load_tensor(img_path);
            } else {
                s.image = load_pnm(img_path);
            }
        } catch (const std::exception& e) {
            throw ConfigError("load_manifest: row " + std::to_string(row) + ": " + e.what());
        }
        if (s.image.ndim() != 3) {
            throw ConfigError("load_manifest: row " + std::to_string(row) +
                              ": image must be (C,H,W)");
        }
        if (target_shape) {
            const auto& t = *target_shape;
            if (s.image.dim(0) != t[0]) {
                throw ConfigError("load_manifest: row " + std::to_string(row) + ": channels " +
                                  std::to_string(s.image.dim(0)) + " != configured " +
                                  std::to_string(t[0]));
            }
            s.image = resize_bilinear(s.image, t[1], t[2]);
        }
        out.samples.push_back(std::move(s));
    }
    if (out.samples.empty()) throw ConfigError("load_manifest: no data rows");

    // Class counts: sidecar wins, otherwise max index + 1.
    const auto sidecar = base / "dataset.json";
    if (std::filesystem::exists(sidecar)) {
        std::ifstream js(sidecar);
        nlohmann::json j = nlohmann::json::parse(js, nullptr, true, true);
        out.num_categories = j.value("num_categories", std::size_t{0});
        out.num_grasps = j.value("num_grasps", std::size_t{0});
        if (j.contains("category_names")) {
            out.category_names = j["category_names"].get<std::vector<std::string>>();
        }
        if (j.contains("grasp_names")) {
            out.grasp_names = j["grasp_names"].get<std::vector<std::string>>();
        }
    }
    for (const auto& s : out.samples) {
        out.num_categories = std::max(out.num_categories, s.category + 1);
        if (s.grasp) out.num_grasps = std::max(out.num_grasps, *s.grasp + 1);
    }
    return out;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir / "images");
    std::ofstream manifest(dir / "manifest.csv");
    if (!manifest) throw ConfigError("save_dataset: cannot write manifest in " + dir.string());
    manifest << "path,object_id,category,grasp\n";
    char name[32];
    for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
        const auto& s = dataset.samples[i];
        std::snprintf(name, sizeof name, "images/%06zu.ten", i);
        save_tensor(dir / name, s.image);
        manifest << name << "," << s.object_id << "," << s.category << ",";
        if (s.grasp) {
            manifest << *s.grasp;
        } else {
            manifest << "-";
        }
        manifest << "\n";
    }
    std::ofstream sidecar(dir / "dataset.json");
    sidecar << dataset_summary_json(dataset) << "\n";
}

std::string dataset_summary_json(const Dataset& dataset) {
    nlohmann::json j;
    j["count"] = dataset.samples.size();
    j["num_categories"] = dataset.num_categories;
    j["num_grasps"] = dataset.num_grasps;
    std::vector<std::size_t> per_cat(dataset.num_categories, 0);
    std::vector<std::size_t> per_grasp(dataset.num_grasps, 0);
    std::size_t masked = 0;
    std::unordered_set<std::string> objects;
    for (const auto& s : dataset.samples) {
        if (s.category < per_cat.size()) ++per_cat[s.category];
        if (s.grasp) {
            if (*s.grasp < per_grasp.size()) ++per_grasp[*s.grasp];
        } else {
            ++masked;
        }
        objects.insert(s.object_id);
    }
    j["num_objects"] = objects.size();
    j["samples_per_category"] = per_cat;
    j["samples_per_grasp"] = per_grasp;
    j["missing_grasp_labels"] = masked;
    if (!dataset.category_names.empty()) j["category_names"] = dataset.category_names;
    if (!dataset.grasp_names.empty()) j["grasp_names"] = dataset.grasp_names;
    if (!dataset.samples.empty()) {
        j["channels"] = dataset.samples[0].image.dim(0);
        j["height"] = dataset.samples[0].image.dim(1);
        j["width"] = dataset.samples[0].image.dim(2);
    }
    return j.dump(2);
}

}  // namespace grasplab
