#include "har/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "har/errors.hpp"

namespace har {

std::string to_string(Arch a) {
    return a == Arch::Proposed ? "proposed" : "baseline";
}

Arch arch_from_string(const std::string& s) {
    if (s == "proposed") return Arch::Proposed;
    if (s == "baseline") return Arch::Baseline;
    throw ConfigError("unknown architecture '" + s + "' (expected proposed|baseline)");
}

ModelConfig ModelConfig::defaults(Arch a) {
    ModelConfig cfg;
    cfg.arch = a;
    cfg.learning_rate = a == Arch::Proposed ? 1e-4 : 1e-3;
    return cfg;
}

void ModelConfig::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw ConfigError(std::string("ModelConfig: ") + what);
    };
    require(channels >= 1, "channels must be >= 1");
    require(window >= 1, "window must be >= 1");
    require(classes >= 1, "classes must be >= 1");
    require(conv_filters >= 1, "conv_filters must be >= 1");
    require(lstm_units >= 1, "lstm_units must be >= 1");
    require(lstm_layers >= 1, "lstm_layers must be >= 1");
    if (arch == Arch::Proposed) {
        require(att_length >= 1, "att_length must be >= 1");
        require(att_output >= 1, "att_output must be >= 1");
    }
    require(learning_rate > 0.0, "learning_rate must be > 0");
    require(batch_size >= 1, "batch_size must be >= 1");
    require(max_epochs >= 1, "max_epochs must be >= 1");
}

Matrix& ParamSet::add(const std::string& name, std::size_t rows, std::size_t cols) {
    if (has(name)) throw ConfigError("ParamSet: duplicate tensor '" + name + "'");
    items_.emplace_back(name, Matrix(rows, cols));
    return items_.back().second;
}

Matrix& ParamSet::at(const std::string& name) {
    for (auto& [n, m] : items_)
        if (n == name) return m;
    throw ConfigError("ParamSet: no tensor '" + name + "'");
}

const Matrix& ParamSet::at(const std::string& name) const {
    for (const auto& [n, m] : items_)
        if (n == name) return m;
    throw ConfigError("ParamSet: no tensor '" + name + "'");
}

bool ParamSet::has(const std::string& name) const {
    for (const auto& [n, m] : items_)
        if (n == name) return true;
    return false;
}

std::size_t ParamSet::value_count() const {
    std::size_t n = 0;
    for (const auto& [name, m] : items_) n += m.size();
    return n;
}

std::vector<double> ParamSet::flatten() const {
    std::vector<double> flat;
    flat.reserve(value_count());
    for (const auto& [name, m] : items_)
        flat.insert(flat.end(), m.values().begin(), m.values().end());
    return flat;
}

void ParamSet::unflatten(const std::vector<double>& flat) {
    if (flat.size() != value_count())
        throw ConfigError("ParamSet::unflatten: length " + std::to_string(flat.size()) +
                          " != " + std::to_string(value_count()));
    std::size_t off = 0;
    for (auto& [name, m] : items_) {
        std::copy(flat.begin() + off, flat.begin() + off + m.size(), m.values().begin());
        off += m.size();
    }
}

ParamSet ParamSet::zeros_like() const {
    ParamSet z;
    for (const auto& [name, m] : items_) z.add(name, m.rows(), m.cols());
    return z;
}

bool ParamSet::same_structure(const ParamSet& o) const {
    if (items_.size() != o.items_.size()) return false;
    for (std::size_t i = 0; i < items_.size(); ++i)
        if (items_[i].first != o.items_[i].first ||
            !items_[i].second.same_shape(o.items_[i].second))
            return false;
    return true;
}

namespace {

void fill_glorot(Matrix& m, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& v : m.values()) v = rng.uniform(-bound, bound);
}

// Modified Gram-Schmidt on the rows of a Gaussian draw.
Matrix random_orthogonal(std::size_t n, Rng& rng) {
    Matrix q(n, n);
    for (double& v : q.values()) v = rng.normal();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            double dot = 0.0;
            for (std::size_t c = 0; c < n; ++c) dot += q(i, c) * q(j, c);
            for (std::size_t c = 0; c < n; ++c) q(i, c) -= dot * q(j, c);
        }
        double norm = 0.0;
        for (std::size_t c = 0; c < n; ++c) norm += q(i, c) * q(i, c);
        norm = std::sqrt(norm);
        for (std::size_t c = 0; c < n; ++c) q(i, c) /= norm;
    }
    return q;
}

std::size_t classifier_input_len(const ModelConfig& cfg) {
    return cfg.arch == Arch::Proposed ? cfg.att_output * cfg.lstm_units : cfg.lstm_units;
}

}  // namespace

ParamSet init_params(const ModelConfig& cfg, Rng& rng) {
    cfg.validate();
    const std::size_t N = cfg.channels, K = cfg.conv_filters, E = cfg.lstm_units;

    ParamSet p;
    fill_glorot(p.add("conv_w", K, N), N, K, rng);
    p.add("conv_b", 1, K);

    for (std::size_t l = 0; l < cfg.lstm_layers; ++l) {
        const std::size_t I = l == 0 ? K : E;
        const std::string tag = "lstm" + std::to_string(l);
        Matrix& wx = p.add(tag + "_wx", 4 * E, I);
        // per-gate Glorot blocks
        for (std::size_t gate = 0; gate < 4; ++gate) {
            const double bound = std::sqrt(6.0 / static_cast<double>(I + E));
            for (std::size_t r = gate * E; r < (gate + 1) * E; ++r)
                for (std::size_t c = 0; c < I; ++c) wx(r, c) = rng.uniform(-bound, bound);
        }
        Matrix& wh = p.add(tag + "_wh", 4 * E, E);
        for (std::size_t gate = 0; gate < 4; ++gate) {
            Matrix q = random_orthogonal(E, rng);
            for (std::size_t r = 0; r < E; ++r)
                for (std::size_t c = 0; c < E; ++c) wh(gate * E + r, c) = q(r, c);
        }
        Matrix& b = p.add(tag + "_b", 1, 4 * E);
        for (std::size_t e = 0; e < E; ++e) b(0, E + e) = 1.0; // forget gate
    }

    if (cfg.arch == Arch::Proposed) {
        fill_glorot(p.add("att_u", cfg.att_length, E), E, cfg.att_length, rng);
        fill_glorot(p.add("att_v", cfg.att_output, cfg.att_length), cfg.att_length,
                    cfg.att_output, rng);
    }

    const std::size_t in_len = classifier_input_len(cfg);
    fill_glorot(p.add("out_w", cfg.classes, in_len), in_len, cfg.classes, rng);
    p.add("out_b", 1, cfg.classes);
    return p;
}

ForwardTrace forward(const ModelConfig& cfg, const ParamSet& params, const Matrix& x) {
    if (x.rows() != cfg.window || x.cols() != cfg.channels)
        throw ConfigError("forward: input shape " + x.shape_str() + " != configured " +
                          std::to_string(cfg.window) + "x" + std::to_string(cfg.channels));

    ForwardTrace tr;
    tr.h_c = conv_embed(x, params.at("conv_w"), params.at("conv_b"));

    const Matrix* input = &tr.h_c;
    for (std::size_t l = 0; l < cfg.lstm_layers; ++l) {
        const std::string tag = "lstm" + std::to_string(l);
        tr.lstm_inputs.push_back(*input);
        tr.lstm.push_back(lstm_forward(tr.lstm_inputs.back(), params.at(tag + "_wx"),
                                       params.at(tag + "_wh"), params.at(tag + "_b")));
        input = &tr.lstm.back().h;
    }
    const Matrix& h_e = tr.lstm.back().h;

    if (cfg.arch == Arch::Proposed) {
        tr.att = attention_forward(h_e, params.at("att_u"), params.at("att_v"));
        tr.s = flatten_row_major(tr.att.scores);
    } else {
        tr.s = flatten_row_major(h_e.row(h_e.rows() - 1));
    }
    tr.probs = dense_softmax(tr.s, params.at("out_w"), params.at("out_b"));
    return tr;
}

ParamSet backward(const ModelConfig& cfg, const ParamSet& params, const Matrix& x,
                  const ForwardTrace& trace, std::size_t label) {
    ParamSet grads = params.zeros_like();

    std::vector<double> dlogits =
        softmax_backward(trace.probs, cross_entropy_backward(trace.probs, label));
    DenseGrads dg = dense_backward(trace.s, params.at("out_w"), dlogits);
    grads.at("out_w") = std::move(dg.dw);
    grads.at("out_b") = std::move(dg.dbias);

    const Matrix& h_e = trace.lstm.back().h;
    Matrix dh_e(h_e.rows(), h_e.cols());
    if (cfg.arch == Arch::Proposed) {
        Matrix dscores(cfg.att_output, cfg.lstm_units);
        dscores.values() = dg.ds;
        AttentionGrads ag = attention_backward(h_e, params.at("att_u"), params.at("att_v"),
                                               trace.att, dscores);
        grads.at("att_u") = std::move(ag.du);
        grads.at("att_v") = std::move(ag.dv);
        dh_e = std::move(ag.dh_e);
    } else {
        for (std::size_t e = 0; e < cfg.lstm_units; ++e)
            dh_e(dh_e.rows() - 1, e) = dg.ds[e];
    }

    Matrix dh = std::move(dh_e);
    for (std::size_t l = cfg.lstm_layers; l-- > 0;) {
        const std::string tag = "lstm" + std::to_string(l);
        LstmGrads lg = lstm_backward(trace.lstm_inputs[l], params.at(tag + "_wx"),
                                     params.at(tag + "_wh"), trace.lstm[l], dh);
        grads.at(tag + "_wx") = std::move(lg.dwx);
        grads.at(tag + "_wh") = std::move(lg.dwh);
        grads.at(tag + "_b") = std::move(lg.dbias);
        dh = std::move(lg.dx);
    }

    ConvGrads cg = conv_backward(x, params.at("conv_w"), dh);
    grads.at("conv_w") = std::move(cg.dw);
    grads.at("conv_b") = std::move(cg.dbias);
    return grads;
}

std::size_t argmax_lowest(const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

std::size_t predict(const ModelConfig& cfg, const ParamSet& params, const Matrix& x) {
    return argmax_lowest(forward(cfg, params, x).probs);
}

namespace {

constexpr char kMagic[] = "HARPARAMS1\n";

void write_u64(std::ostream& os, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64(std::istream& is) {
    unsigned char buf[8];
    is.read(reinterpret_cast<char*>(buf), 8);
    if (!is) throw DataError("params file truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

std::string config_header(const ModelConfig& cfg) {
    std::ostringstream os;
    os << "arch=" << to_string(cfg.arch) << "\n"
       << "channels=" << cfg.channels << "\n"
       << "window=" << cfg.window << "\n"
       << "classes=" << cfg.classes << "\n"
       << "conv_filters=" << cfg.conv_filters << "\n"
       << "lstm_units=" << cfg.lstm_units << "\n"
       << "lstm_layers=" << cfg.lstm_layers << "\n"
       << "att_length=" << cfg.att_length << "\n"
       << "att_output=" << cfg.att_output << "\n"
       << "batch_size=" << cfg.batch_size << "\n"
       << "max_epochs=" << cfg.max_epochs << "\n"
       << "patience=" << cfg.patience << "\n"
       << "seed=" << cfg.seed << "\n";
    os.precision(17);
    os << "learning_rate=" << cfg.learning_rate << "\n";
    return os.str();
}

ModelConfig parse_config_header(const std::string& text) {
    ModelConfig cfg;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        auto eq = line.find('=');
        if (eq == std::string::npos) throw DataError("bad config header line: " + line);
        const std::string key = line.substr(0, eq);
        const std::string val = line.substr(eq + 1);
        if (key == "arch") cfg.arch = arch_from_string(val);
        else if (key == "channels") cfg.channels = std::stoull(val);
        else if (key == "window") cfg.window = std::stoull(val);
        else if (key == "classes") cfg.classes = std::stoull(val);
        else if (key == "conv_filters") cfg.conv_filters = std::stoull(val);
        else if (key == "lstm_units") cfg.lstm_units = std::stoull(val);
        else if (key == "lstm_layers") cfg.lstm_layers = std::stoull(val);
        else if (key == "att_length") cfg.att_length = std::stoull(val);
        else if (key == "att_output") cfg.att_output = std::stoull(val);
        else if (key == "batch_size") cfg.batch_size = std::stoull(val);
        else if (key == "max_epochs") cfg.max_epochs = std::stoull(val);
        else if (key == "patience") cfg.patience = std::stoull(val);
        else if (key == "seed") cfg.seed = std::stoull(val);
        else if (key == "learning_rate") cfg.learning_rate = std::stod(val);
        else throw DataError("unknown config header key: " + key);
    }
    return cfg;
}

}  // namespace

void save_params(const std::string& path, const ModelConfig& cfg, const ParamSet& params) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open for write: " + path);
    os.write(kMagic, sizeof(kMagic) - 1);
    const std::string header = config_header(cfg);
    write_u64(os, header.size());
    os.write(header.data(), static_cast<std::streamsize>(header.size()));
    write_u64(os, params.items().size());
    for (const auto& [name, m] : params.items()) {
        write_u64(os, name.size());
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_u64(os, m.rows());
        write_u64(os, m.cols());
        os.write(reinterpret_cast<const char*>(m.values().data()),
                 static_cast<std::streamsize>(m.size() * sizeof(double)));
    }
    if (!os) throw DataError("write failed: " + path);
}

std::pair<ModelConfig, ParamSet> load_params(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open: " + path);
    char magic[sizeof(kMagic) - 1];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(magic)) != 0)
        throw DataError("not a params file: " + path);
    std::string header(read_u64(is), '\0');
    is.read(header.data(), static_cast<std::streamsize>(header.size()));
    ModelConfig cfg = parse_config_header(header);

    ParamSet params;
    const std::uint64_t count = read_u64(is);
    for (std::uint64_t i = 0; i < count; ++i) {
        std::string name(read_u64(is), '\0');
        is.read(name.data(), static_cast<std::streamsize>(name.size()));
        const std::uint64_t rows = read_u64(is);
        const std::uint64_t cols = read_u64(is);
        Matrix& m = params.add(name, rows, cols);
        is.read(reinterpret_cast<char*>(m.values().data()),
                static_cast<std::streamsize>(m.size() * sizeof(double)));
        if (!is) throw DataError("params file truncated: " + path);
    }
    return {cfg, std::move(params)};
}

}  // namespace har
