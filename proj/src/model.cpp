#include "grasplab/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include <json.hpp>

#include "grasplab/kernels.hpp"

namespace grasplab {

using nlohmann::json;

std::string extractor_name(ExtractorKind k) {
    return k == ExtractorKind::mlp ? "mlp" : "smallcnn";
}

ExtractorKind extractor_from_name(const std::string& name) {
    if (name == "mlp") return ExtractorKind::mlp;
    if (name == "smallcnn") return ExtractorKind::smallcnn;
    throw ConfigError("unknown extractor kind: " + name);
}

namespace {

std::size_t conv_out(std::size_t in, std::size_t k, std::size_t s) {
    if (k > in) {
        throw ConfigError("conv layer: kernel " + std::to_string(k) + " larger than input " +
                          std::to_string(in));
    }
    return (in - k) / s + 1;
}

struct TensorSpec {
    std::string name;
    std::vector<std::size_t> shape;
    std::size_t fan_in = 0;
    std::size_t fan_out = 0;
};

void append_fc_specs(std::vector<TensorSpec>& specs, std::size_t in_dim,
                     const std::vector<std::size_t>& dims, const std::string& prefix) {
    std::size_t prev = in_dim;
    for (std::size_t m = 0; m < dims.size(); ++m) {
        const std::size_t d = dims[m];
        if (d == 0) throw ConfigError(prefix + " layer " + std::to_string(m) + ": zero dim");
        const std::string base = prefix + std::to_string(m);
        specs.push_back({base + ".w", {d, prev}, prev, d});
        specs.push_back({base + ".b", {d}, 0, 0});
        prev = d;
    }
}

std::vector<TensorSpec> extractor_specs(const ArchConfig& cfg, ExtractorKind kind,
                                        const std::vector<std::size_t>& fc_dims,
                                        const std::string& prefix) {
    std::vector<TensorSpec> specs;
    std::size_t flat = cfg.in_channels * cfg.in_height * cfg.in_width;
    if (kind == ExtractorKind::smallcnn) {
        const std::size_t k = cfg.conv_kernel, s = cfg.conv_stride;
        if (k == 0 || s == 0 || cfg.conv_channels1 == 0 || cfg.conv_channels2 == 0) {
            throw ConfigError(prefix + ": conv parameters must be positive");
        }
        specs.push_back({prefix + "conv1.w",
                         {cfg.conv_channels1, cfg.in_channels, k, k},
                         cfg.in_channels * k * k,
                         cfg.conv_channels1 * k * k});
        specs.push_back({prefix + "conv1.b", {cfg.conv_channels1}, 0, 0});
        specs.push_back({prefix + "conv2.w",
                         {cfg.conv_channels2, cfg.conv_channels1, k, k},
                         cfg.conv_channels1 * k * k,
                         cfg.conv_channels2 * k * k});
        specs.push_back({prefix + "conv2.b", {cfg.conv_channels2}, 0, 0});
        const std::size_t h1 = conv_out(cfg.in_height, k, s);
        const std::size_t w1 = conv_out(cfg.in_width, k, s);
        const std::size_t h2 = conv_out(h1, k, s);
        const std::size_t w2 = conv_out(w1, k, s);
        if (cfg.pool_window == 0 || h2 % cfg.pool_window != 0 || w2 % cfg.pool_window != 0) {
            throw ConfigError(prefix + ": pool window " + std::to_string(cfg.pool_window) +
                              " does not divide feature map " + std::to_string(h2) + "x" +
                              std::to_string(w2));
        }
        flat = cfg.conv_channels2 * (h2 / cfg.pool_window) * (w2 / cfg.pool_window);
    }
    append_fc_specs(specs, flat, fc_dims, prefix + "fc");
    return specs;
}

std::vector<TensorSpec> classifier_specs(std::size_t in_dim,
                                         const std::vector<std::size_t>& hidden,
                                         std::size_t out_dim, const std::string& prefix) {
    if (out_dim == 0) throw ConfigError(prefix + ": output class count must be positive");
    std::vector<TensorSpec> specs;
    append_fc_specs(specs, in_dim, hidden, prefix + "fc");
    const std::size_t prev = hidden.empty() ? in_dim : hidden.back();
    specs.push_back({prefix + "out.w", {out_dim, prev}, prev, out_dim});
    specs.push_back({prefix + "out.b", {out_dim}, 0, 0});
    return specs;
}

std::size_t extractor_out_dim(const std::vector<std::size_t>& fc_dims, std::size_t flat) {
    return fc_dims.empty() ? flat : fc_dims.back();
}

}  // namespace

void ArchConfig::validate() const {
    if (in_channels == 0 || in_height == 0 || in_width == 0) {
        throw ConfigError("arch: input dims must be positive");
    }
    if (num_categories == 0 || num_grasps == 0) {
        throw ConfigError("arch: class counts must be positive");
    }
    // building the specs performs the remaining shape checks
    (void)extractor_specs(*this, category_extractor, category_extractor_fc, "cat_ext.");
    (void)extractor_specs(*this, grasp_extractor, grasp_extractor_fc, "grasp_ext.");
}

std::size_t ArchConfig::conv_flat_dim() const {
    const std::size_t h1 = conv_out(in_height, conv_kernel, conv_stride);
    const std::size_t w1 = conv_out(in_width, conv_kernel, conv_stride);
    const std::size_t h2 = conv_out(h1, conv_kernel, conv_stride);
    const std::size_t w2 = conv_out(w1, conv_kernel, conv_stride);
    return conv_channels2 * (h2 / pool_window) * (w2 / pool_window);
}

std::size_t ArchConfig::category_feature_dim() const {
    const std::size_t flat = category_extractor == ExtractorKind::smallcnn
                                 ? conv_flat_dim()
                                 : in_channels * in_height * in_width;
    return extractor_out_dim(category_extractor_fc, flat);
}

std::size_t ArchConfig::grasp_feature_dim() const {
    const std::size_t flat = grasp_extractor == ExtractorKind::smallcnn
                                 ? conv_flat_dim()
                                 : in_channels * in_height * in_width;
    return extractor_out_dim(grasp_extractor_fc, flat);
}

std::size_t ParamGroup::total_params() const {
    std::size_t n = 0;
    for (const auto& t : tensors) n += t.numel();
    return n;
}

std::size_t ModelParams::total_params() const {
    return theta1.total_params() + theta2.total_params() + theta3.total_params() +
           theta4.total_params();
}

ModelParams init_model(const ArchConfig& cfg) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    auto build = [&rng](const std::vector<TensorSpec>& specs) {
        ParamGroup g;
        for (const auto& spec : specs) {
            Tensor t(spec.shape);
            if (spec.fan_in > 0) {
                const double a =
                    std::sqrt(6.0 / static_cast<double>(spec.fan_in + spec.fan_out));
                std::uniform_real_distribution<double> dist(-a, a);
                for (std::size_t i = 0; i < t.numel(); ++i) t[i] = dist(rng);
            }
            g.names.push_back(spec.name);
            g.tensors.push_back(std::move(t));
        }
        return g;
    };
    ModelParams p;
    p.theta1 = build(extractor_specs(cfg, cfg.category_extractor, cfg.category_extractor_fc,
                                     "cat_ext."));
    p.theta2 = build(classifier_specs(cfg.category_feature_dim(), cfg.category_classifier_fc,
                                      cfg.num_categories, "cat_cls."));
    p.theta3 =
        build(extractor_specs(cfg, cfg.grasp_extractor, cfg.grasp_extractor_fc, "grasp_ext."));
    p.theta4 = build(classifier_specs(cfg.grasp_feature_dim() + cfg.category_feature_dim(),
                                      cfg.grasp_classifier_fc, cfg.num_grasps, "grasp_cls."));
    return p;
}

namespace {

Tensor flatten_tensor(const Tensor& t) { return Tensor({t.numel()}, t.values()); }

void check_input_shape(const Tensor& x, const ArchConfig& cfg) {
    if (x.ndim() != 3 || x.dim(0) != cfg.in_channels || x.dim(1) != cfg.in_height ||
        x.dim(2) != cfg.in_width) {
        throw DimensionError("forward: input " + x.shape_str() + " does not match configured " +
                             std::to_string(cfg.in_channels) + "x" +
                             std::to_string(cfg.in_height) + "x" + std::to_string(cfg.in_width));
    }
}

Tensor fc_forward(const Tensor& h, const Tensor& w, const Tensor& b, bool relu_act) {
    if (h.numel() != w.dim(1)) {
        throw DimensionError("fc: input length " + std::to_string(h.numel()) +
                             " != weight cols " + std::to_string(w.dim(1)));
    }
    Tensor z({w.dim(0)});
    kernels::gemm(w.data(), h.data(), z.data(), w.dim(0), w.dim(1), 1);
    kernels::add(z.data(), b.data(), z.data(), z.numel());
    if (relu_act) kernels::relu(z.data(), z.data(), z.numel());
    return z;
}

// No-grad extractor: conv/pool stage (smallcnn) then relu FC chain.
Tensor run_extractor(const Tensor& x_norm, ExtractorKind kind, const ArchConfig& cfg,
                     const ParamGroup& g) {
    std::size_t pi = 0;
    Tensor h;
    if (kind == ExtractorKind::smallcnn) {
        const auto& k1 = g.tensors[0];
        const auto& b1 = g.tensors[1];
        const auto& k2 = g.tensors[2];
        const auto& b2 = g.tensors[3];
        pi = 4;
        const std::size_t C = x_norm.dim(0), H = x_norm.dim(1), W = x_norm.dim(2);
        const std::size_t h1 = conv_out(H, cfg.conv_kernel, cfg.conv_stride);
        const std::size_t w1 = conv_out(W, cfg.conv_kernel, cfg.conv_stride);
        Tensor c1({cfg.conv_channels1, h1, w1});
        kernels::conv2d(x_norm.data(), k1.data(), b1.data(), c1.data(), C, H, W,
                        cfg.conv_channels1, cfg.conv_kernel, cfg.conv_kernel, cfg.conv_stride);
        kernels::relu(c1.data(), c1.data(), c1.numel());
        const std::size_t h2 = conv_out(h1, cfg.conv_kernel, cfg.conv_stride);
        const std::size_t w2 = conv_out(w1, cfg.conv_kernel, cfg.conv_stride);
        Tensor c2({cfg.conv_channels2, h2, w2});
        kernels::conv2d(c1.data(), k2.data(), b2.data(), c2.data(), cfg.conv_channels1, h1, w1,
                        cfg.conv_channels2, cfg.conv_kernel, cfg.conv_kernel, cfg.conv_stride);
        kernels::relu(c2.data(), c2.data(), c2.numel());
        Tensor pooled({cfg.conv_channels2, h2 / cfg.pool_window, w2 / cfg.pool_window});
        kernels::maxpool2d(c2.data(), pooled.data(), nullptr, cfg.conv_channels2, h2, w2,
                           cfg.pool_window, cfg.pool_window);
        h = flatten_tensor(pooled);
    } else {
        h = flatten_tensor(x_norm);
    }
    for (; pi + 1 < g.tensors.size(); pi += 2) {
        h = fc_forward(h, g.tensors[pi], g.tensors[pi + 1], true);
    }
    return h;
}

// No-grad classifier: relu hidden layers, softmax output.
Tensor run_classifier(const Tensor& features, const ParamGroup& g) {
    Tensor h = features;
    for (std::size_t pi = 0; pi + 2 < g.tensors.size(); pi += 2) {
        h = fc_forward(h, g.tensors[pi], g.tensors[pi + 1], true);
    }
    Tensor z = fc_forward(h, g.tensors[g.tensors.size() - 2], g.tensors.back(), false);
    kernels::softmax(z.data(), z.data(), z.numel());
    return z;
}

}  // namespace

std::pair<Tensor, Tensor> forward_category(const Tensor& x, const ArchConfig& cfg,
                                           const ParamGroup& theta1, const ParamGroup& theta2) {
    check_input_shape(x, cfg);
    const Tensor x_norm = normalize_image(x, Branch::category).image;
    Tensor i_category = run_extractor(x_norm, cfg.category_extractor, cfg, theta1);
    Tensor f_o = run_classifier(i_category, theta2);
    return {std::move(i_category), std::move(f_o)};
}

std::pair<Tensor, Tensor> forward_grasp(const Tensor& x, const Tensor& i_category,
                                        const ArchConfig& cfg, const ParamGroup& theta3,
                                        const ParamGroup& theta4) {
    check_input_shape(x, cfg);
    const Tensor x_norm = normalize_image(x, Branch::grasp, cfg.grasp_norm).image;
    Tensor i_grasp = run_extractor(x_norm, cfg.grasp_extractor, cfg, theta3);
    // concatenation order is fixed: [I_grasp, I_category]
    Tensor concat({i_grasp.numel() + i_category.numel()});
    std::copy(i_grasp.data(), i_grasp.data() + i_grasp.numel(), concat.data());
    std::copy(i_category.data(), i_category.data() + i_category.numel(),
              concat.data() + i_grasp.numel());
    Tensor f_g = run_classifier(concat, theta4);
    return {std::move(i_grasp), std::move(f_g)};
}

ForwardTrace forward_trace(const Tensor& x, const ArchConfig& cfg, const ModelParams& params) {
    ForwardTrace t;
    auto [i_category, f_o] = forward_category(x, cfg, params.theta1, params.theta2);
    auto [i_grasp, f_g] = forward_grasp(x, i_category, cfg, params.theta3, params.theta4);
    t.i_concat = Tensor({i_grasp.numel() + i_category.numel()});
    std::copy(i_grasp.data(), i_grasp.data() + i_grasp.numel(), t.i_concat.data());
    std::copy(i_category.data(), i_category.data() + i_category.numel(),
              t.i_concat.data() + i_grasp.numel());
    t.i_category = std::move(i_category);
    t.i_grasp = std::move(i_grasp);
    t.f_o = std::move(f_o);
    t.f_g = std::move(f_g);
    return t;
}

std::size_t argmax_lowest(const Tensor& probs) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < probs.numel(); ++i) {
        if (probs[i] > probs[best]) best = i;
    }
    return best;
}

std::pair<std::size_t, std::size_t> predict(const Tensor& x, const ArchConfig& cfg,
                                            const ModelParams& params) {
    const ForwardTrace t = forward_trace(x, cfg, params);
    return {argmax_lowest(t.f_o), argmax_lowest(t.f_g)};
}

ParamNodes make_param_nodes(const ModelParams& params, bool train1, bool train2, bool train3,
                            bool train4) {
    auto lift = [](const ParamGroup& g, bool trainable) {
        std::vector<ag::NodePtr> nodes;
        nodes.reserve(g.tensors.size());
        for (const auto& t : g.tensors) {
            nodes.push_back(trainable ? ag::parameter(t) : ag::constant(t));
        }
        return nodes;
    };
    ParamNodes n;
    n.theta1 = lift(params.theta1, train1);
    n.theta2 = lift(params.theta2, train2);
    n.theta3 = lift(params.theta3, train3);
    n.theta4 = lift(params.theta4, train4);
    return n;
}

namespace {

ag::NodePtr graph_extractor(const ag::NodePtr& x_norm, ExtractorKind kind,
                            const ArchConfig& cfg, const std::vector<ag::NodePtr>& g) {
    std::size_t pi = 0;
    ag::NodePtr h;
    if (kind == ExtractorKind::smallcnn) {
        ag::NodePtr c1 = ag::relu(ag::conv2d(x_norm, g[0], g[1], cfg.conv_stride));
        ag::NodePtr c2 = ag::relu(ag::conv2d(c1, g[2], g[3], cfg.conv_stride));
        h = ag::flatten(ag::max_pool(c2, cfg.pool_window, cfg.pool_window));
        pi = 4;
    } else {
        h = ag::flatten(x_norm);
    }
    for (; pi + 1 < g.size(); pi += 2) {
        h = ag::relu(ag::add_bias(ag::matmul(g[pi], h), g[pi + 1]));
    }
    return h;
}

ag::NodePtr graph_classifier_logits(const ag::NodePtr& features,
                                    const std::vector<ag::NodePtr>& g) {
    ag::NodePtr h = features;
    for (std::size_t pi = 0; pi + 2 < g.size(); pi += 2) {
        h = ag::relu(ag::add_bias(ag::matmul(g[pi], h), g[pi + 1]));
    }
    return ag::add_bias(ag::matmul(g[g.size() - 2], h), g.back());
}

}  // namespace

ModelGraph forward_graph(const Tensor& x, const ArchConfig& cfg, const ParamNodes& nodes) {
    check_input_shape(x, cfg);
    ModelGraph g;
    ag::NodePtr x_cat = ag::constant(normalize_image(x, Branch::category).image);
    ag::NodePtr x_grasp = ag::constant(normalize_image(x, Branch::grasp, cfg.grasp_norm).image);
    g.i_category = graph_extractor(x_cat, cfg.category_extractor, cfg, nodes.theta1);
    g.logits_o = graph_classifier_logits(g.i_category, nodes.theta2);
    g.f_o = ag::softmax(g.logits_o);
    g.i_grasp = graph_extractor(x_grasp, cfg.grasp_extractor, cfg, nodes.theta3);
    ag::NodePtr concat = ag::concat(g.i_grasp, g.i_category);
    g.logits_g = graph_classifier_logits(concat, nodes.theta4);
    g.f_g = ag::softmax(g.logits_g);
    return g;
}

// ---------------------------------------------------------------------------
// Checkpoint + config serialization
// ---------------------------------------------------------------------------

std::string arch_to_json(const ArchConfig& cfg) {
    json j;
    j["in_channels"] = cfg.in_channels;
    j["in_height"] = cfg.in_height;
    j["in_width"] = cfg.in_width;
    j["category_extractor"] = extractor_name(cfg.category_extractor);
    j["grasp_extractor"] = extractor_name(cfg.grasp_extractor);
    j["category_extractor_fc"] = cfg.category_extractor_fc;
    j["category_classifier_fc"] = cfg.category_classifier_fc;
    j["grasp_extractor_fc"] = cfg.grasp_extractor_fc;
    j["grasp_classifier_fc"] = cfg.grasp_classifier_fc;
    j["conv_channels1"] = cfg.conv_channels1;
    j["conv_channels2"] = cfg.conv_channels2;
    j["conv_kernel"] = cfg.conv_kernel;
    j["conv_stride"] = cfg.conv_stride;
    j["pool_window"] = cfg.pool_window;
    j["num_categories"] = cfg.num_categories;
    j["num_grasps"] = cfg.num_grasps;
    j["grasp_norm"] = cfg.grasp_norm == NormMode::standardize ? "standardize" : "as_written";
    j["seed"] = cfg.seed;
    return j.dump();
}

ArchConfig arch_from_json(const std::string& json_text) {
    const json j = json::parse(json_text);
    ArchConfig cfg;
    cfg.in_channels = j.value("in_channels", cfg.in_channels);
    cfg.in_height = j.value("in_height", cfg.in_height);
    cfg.in_width = j.value("in_width", cfg.in_width);
    if (j.contains("category_extractor")) {
        cfg.category_extractor = extractor_from_name(j["category_extractor"]);
    }
    if (j.contains("grasp_extractor")) {
        cfg.grasp_extractor = extractor_from_name(j["grasp_extractor"]);
    }
    cfg.category_extractor_fc =
        j.value("category_extractor_fc", cfg.category_extractor_fc);
    cfg.category_classifier_fc =
        j.value("category_classifier_fc", cfg.category_classifier_fc);
    cfg.grasp_extractor_fc = j.value("grasp_extractor_fc", cfg.grasp_extractor_fc);
    cfg.grasp_classifier_fc = j.value("grasp_classifier_fc", cfg.grasp_classifier_fc);
    cfg.conv_channels1 = j.value("conv_channels1", cfg.conv_channels1);
    cfg.conv_channels2 = j.value("conv_channels2", cfg.conv_channels2);
    cfg.conv_kernel = j.value("conv_kernel", cfg.conv_kernel);
    cfg.conv_stride = j.value("conv_stride", cfg.conv_stride);
    cfg.pool_window = j.value("pool_window", cfg.pool_window);
    cfg.num_categories = j.value("num_categories", cfg.num_categories);
    cfg.num_grasps = j.value("num_grasps", cfg.num_grasps);
    if (j.contains("grasp_norm")) {
        const std::string m = j["grasp_norm"];
        if (m == "standardize") {
            cfg.grasp_norm = NormMode::standardize;
        } else if (m == "as_written") {
            cfg.grasp_norm = NormMode::as_written;
        } else {
            throw ConfigError("unknown grasp_norm mode: " + m);
        }
    }
    cfg.seed = j.value("seed", cfg.seed);
    return cfg;
}

namespace {
constexpr char kCheckpointMagic[8] = {'G', 'L', 'A', 'B', 'C', 'K', 'P', '1'};

json group_manifest(const ParamGroup& g) {
    json arr = json::array();
    for (std::size_t i = 0; i < g.tensors.size(); ++i) {
        json t;
        t["name"] = g.names[i];
        t["shape"] = g.tensors[i].shape();
        arr.push_back(std::move(t));
    }
    return arr;
}

void write_group(std::ofstream& os, const ParamGroup& g) {
    for (const auto& t : g.tensors) {
        os.write(reinterpret_cast<const char*>(t.data()),
                 static_cast<std::streamsize>(t.numel() * sizeof(double)));
    }
}

ParamGroup read_group(std::ifstream& is, const json& manifest) {
    ParamGroup g;
    for (const auto& t : manifest) {
        g.names.push_back(t["name"]);
        Tensor tensor(t["shape"].get<std::vector<std::size_t>>());
        is.read(reinterpret_cast<char*>(tensor.data()),
                static_cast<std::streamsize>(tensor.numel() * sizeof(double)));
        g.tensors.push_back(std::move(tensor));
    }
    return g;
}
}  // namespace

void save_checkpoint(const std::string& path, const ArchConfig& cfg,
                     const ModelParams& params) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("save_checkpoint: cannot open " + path);
    json header;
    header["format_version"] = 1;
    header["arch"] = json::parse(arch_to_json(cfg));
    header["groups"] = {{"theta1", group_manifest(params.theta1)},
                        {"theta2", group_manifest(params.theta2)},
                        {"theta3", group_manifest(params.theta3)},
                        {"theta4", group_manifest(params.theta4)}};
    const std::string text = header.dump();
    os.write(kCheckpointMagic, 8);
    const std::uint64_t len = text.size();
    os.write(reinterpret_cast<const char*>(&len), sizeof len);
    os.write(text.data(), static_cast<std::streamsize>(text.size()));
    write_group(os, params.theta1);
    write_group(os, params.theta2);
    write_group(os, params.theta3);
    write_group(os, params.theta4);
    if (!os) throw ConfigError("save_checkpoint: write failed for " + path);
}

std::pair<ArchConfig, ModelParams> load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("load_checkpoint: cannot open " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kCheckpointMagic, 8) != 0) {
        throw ConfigError("load_checkpoint: bad magic in " + path);
    }
    std::uint64_t len = 0;
    is.read(reinterpret_cast<char*>(&len), sizeof len);
    std::string text(len, '\0');
    is.read(text.data(), static_cast<std::streamsize>(len));
    if (!is) throw ConfigError("load_checkpoint: truncated header in " + path);
    const json header = json::parse(text);
    if (header.value("format_version", 0) != 1) {
        throw ConfigError("load_checkpoint: unsupported format version");
    }
    ArchConfig cfg = arch_from_json(header["arch"].dump());
    ModelParams params;
    params.theta1 = read_group(is, header["groups"]["theta1"]);
    params.theta2 = read_group(is, header["groups"]["theta2"]);
    params.theta3 = read_group(is, header["groups"]["theta3"]);
    params.theta4 = read_group(is, header["groups"]["theta4"]);
    if (!is) throw ConfigError("load_checkpoint: truncated tensor data in " + path);
    return {std::move(cfg), std::move(params)};
}

}  // namespace grasplab
