#include "kalikow/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include "kalikow/models.hpp"

namespace kalikow {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& items, const std::string& sep) {
    std::string out;
    for (const auto& s : items) out += (out.empty() ? "" : sep) + s;
    return out;
}

constexpr std::int64_t kAnyNode = std::numeric_limits<std::int64_t>::min();

enum class Range { Any, Positive, NonNegative, Unit, OpenUnit };

const char* describe(Range r) {
    switch (r) {
        case Range::Positive: return "must be > 0";
        case Range::NonNegative: return "must be >= 0";
        case Range::Unit: return "must lie in [0, 1]";
        case Range::OpenUnit: return "must lie in (0, 1)";
        default: return "must be finite";
    }
}

bool in_range(double x, Range r) {
    switch (r) {
        case Range::Positive: return x > 0.0;
        case Range::NonNegative: return x >= 0.0;
        case Range::Unit: return x >= 0.0 && x <= 1.0;
        case Range::OpenUnit: return x > 0.0 && x < 1.0;
        default: return std::isfinite(x);
    }
}

// Reads one JSON object, records problems under its dotted path and
// remembers which keys were consumed so leftovers can be reported.
class Reader {
public:
    Reader(const json& obj, std::string path, std::vector<std::string>& errors)
        : obj_(obj), path_(std::move(path)), errors_(errors) {
        if (!obj_.is_object()) fail("", "must be an object");
    }

    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    void fail(const std::string& key, const std::string& what) const {
        errors_.push_back((key.empty() ? path_ : at(key)) + ": " + what);
    }
    bool ok() const { return obj_.is_object(); }

    const json* get(const std::string& key, bool required) {
        used_.insert(key);
        if (!ok() || !obj_.contains(key) || obj_.at(key).is_null()) {
            if (required && ok()) fail(key, "missing required field");
            return nullptr;
        }
        return &obj_.at(key);
    }
    bool has(const std::string& key) const { return ok() && obj_.contains(key) && !obj_.at(key).is_null(); }

    std::optional<double> number(const std::string& key, bool required, Range r = Range::Any) {
        const json* v = get(key, required);
        if (!v) return std::nullopt;
        if (!v->is_number()) {
            fail(key, "must be a number");
            return std::nullopt;
        }
        const double x = v->get<double>();
        if (std::isnan(x) || !in_range(x, r) || (r != Range::Positive && std::isinf(x))) {
            std::ostringstream os;
            os << describe(r) << " (got " << x << ")";
            fail(key, os.str());
            return std::nullopt;
        }
        return x;
    }
    double number_or(const std::string& key, double fallback, Range r = Range::Any) {
        return number(key, false, r).value_or(fallback);
    }

    std::optional<std::int64_t> integer(const std::string& key, bool required, std::int64_t min = 0) {
        const json* v = get(key, required);
        if (!v) return std::nullopt;
        if (!v->is_number_integer()) {
            fail(key, "must be an integer");
            return std::nullopt;
        }
        const auto n = v->get<std::int64_t>();
        if (n < min) {
            fail(key, "must be >= " + std::to_string(min) + " (got " + std::to_string(n) + ")");
            return std::nullopt;
        }
        return n;
    }

    std::optional<std::string> string(const std::string& key, bool required) {
        const json* v = get(key, required);
        if (!v) return std::nullopt;
        if (!v->is_string()) {
            fail(key, "must be a string");
            return std::nullopt;
        }
        return v->get<std::string>();
    }

    std::optional<std::vector<double>> numbers(const std::string& key, bool required, Range r = Range::Any) {
        const json* v = get(key, required);
        if (!v) return std::nullopt;
        if (!v->is_array()) {
            fail(key, "must be an array of numbers");
            return std::nullopt;
        }
        std::vector<double> out;
        bool good = true;
        for (std::size_t k = 0; k < v->size(); ++k) {
            const auto& e = (*v)[k];
            if (!e.is_number() || !in_range(e.get<double>(), r)) {
                fail(key + "[" + std::to_string(k) + "]", e.is_number() ? describe(r) : "must be a number");
                good = false;
                continue;
            }
            out.push_back(e.get<double>());
        }
        if (!good) return std::nullopt;
        return out;
    }

    std::optional<Reader> child(const std::string& key, bool required) {
        const json* v = get(key, required);
        if (!v) return std::nullopt;
        return Reader(*v, at(key), errors_);
    }

    const json* array(const std::string& key, bool required) {
        const json* v = get(key, required);
        if (v && !v->is_array()) {
            fail(key, "must be an array");
            return nullptr;
        }
        return v;
    }

    void finish() const {
        if (!ok()) return;
        for (const auto& [k, v] : obj_.items()) {
            if (!used_.count(k)) fail(k, "unknown field");
        }
    }

private:
    const json& obj_;
    std::string path_;
    std::vector<std::string>& errors_;
    std::set<std::string> used_;
};

std::optional<RateFunction> read_psi(Reader r) {
    const auto type = r.string("type", true);
    std::optional<RateFunction> out;
    if (!type) {
        r.finish();
        return out;
    }
    if (*type == "affine") {
        const auto base = r.number("base", true, Range::NonNegative);
        const auto slope = r.number("slope", true, Range::NonNegative);
        if (base && slope) out = RateFunction::affine(*base, *slope);
    } else if (*type == "clipped") {
        const auto base = r.number("base", true, Range::NonNegative);
        const auto slope = r.number("slope", true, Range::NonNegative);
        const auto cap = r.number("cap", true, Range::Positive);
        if (base && slope && cap) out = RateFunction::clipped(*base, *slope, *cap);
    } else if (*type == "sigmoid") {
        const auto height = r.number("height", true, Range::Positive);
        const auto slope = r.number("slope", true, Range::Positive);
        const auto mid = r.number("mid", false);
        if (height && slope) out = RateFunction::sigmoid(*height, *slope, mid.value_or(0.0));
    } else if (*type == "exp" || *type == "cosh") {
        const auto scale = r.number("scale", true, Range::Positive);
        const auto rate = r.number("rate", true, Range::NonNegative);
        if (scale && rate) out = *type == "exp" ? RateFunction::exp(*scale, *rate) : RateFunction::cosh(*scale, *rate);
    } else if (*type == "polynomial") {
        const auto coeffs = r.numbers("coefficients", true, Range::NonNegative);
        if (coeffs) {
            if (coeffs->empty()) {
                r.fail("coefficients", "must not be empty");
            } else {
                out = RateFunction::polynomial(*coeffs);
            }
        }
    } else {
        r.fail("type", "unknown rate function '" + *type +
                           "' (affine, clipped, sigmoid, exp, cosh, polynomial)");
    }
    r.finish();
    return out;
}

// psi given as one object (shared by `nodes` nodes) or as one object per node.
std::vector<RateFunction> read_psi_list(Reader& r, std::size_t nodes, std::vector<std::string>& errors) {
    std::vector<RateFunction> out;
    const json* v = r.get("psi", true);
    if (!v) return out;
    if (v->is_array()) {
        if (v->size() != nodes) r.fail("psi", "expected " + std::to_string(nodes) + " entries");
        for (std::size_t k = 0; k < v->size(); ++k) {
            if (auto p = read_psi(Reader((*v)[k], r.at("psi") + "[" + std::to_string(k) + "]", errors))) {
                out.push_back(*p);
            }
        }
        if (out.size() != v->size()) out.clear();
        return out;
    }
    if (auto p = read_psi(Reader(*v, r.at("psi"), errors))) out.assign(nodes, *p);
    return out;
}

std::optional<Kernel> read_kernel(Reader& r) {
    const auto type = r.string("type", true);
    std::optional<Kernel> out;
    if (type == "exponential") {
        const auto alpha = r.number("alpha", true, Range::NonNegative);
        const auto beta = r.number("beta", true, Range::Positive);
        if (alpha && beta) out = Kernel::exponential(*alpha, *beta);
    } else if (type == "step") {
        const auto edges = r.numbers("edges", true, Range::NonNegative);
        const auto values = r.numbers("values", true, Range::NonNegative);
        if (edges && values) {
            try {
                out = Kernel::step(*edges, *values);
            } catch (const std::exception& e) {
                r.fail("", e.what());
            }
        }
    } else if (type == "zero") {
        out = Kernel::zero();
    } else if (type) {
        r.fail("type", "unknown kernel '" + *type + "' (exponential, step, zero)");
    }
    return out;
}

KernelMatrix read_kernels(Reader& r, std::size_t nodes, std::vector<std::string>& errors, bool required = true) {
    KernelMatrix kernels(nodes);
    const json* list = r.array("kernels", required);
    if (!list) return kernels;
    for (std::size_t k = 0; k < list->size(); ++k) {
        Reader e((*list)[k], r.at("kernels") + "[" + std::to_string(k) + "]", errors);
        const auto target = e.integer("target", true);
        const auto source = e.integer("source", true);
        for (const auto& [name, idx] : {std::pair{"target", target}, std::pair{"source", source}}) {
            if (idx && std::size_t(*idx) >= nodes) e.fail(name, "node index out of range");
        }
        auto kernel = read_kernel(e);
        e.finish();
        if (target && source && kernel && std::size_t(*target) < nodes && std::size_t(*source) < nodes) {
            kernels.set(NodeId(*target), NodeId(*source), *kernel);
        }
    }
    return kernels;
}

std::vector<std::vector<std::vector<NodeId>>> read_levels(Reader& r, std::size_t nodes) {
    std::vector<std::vector<std::vector<NodeId>>> out;
    const json* v = r.array("levels", false);
    if (!v) return out;
    try {
        out = v->get<std::vector<std::vector<std::vector<NodeId>>>>();
        if (out.size() != nodes) r.fail("levels", "expected one ring list per node");
    } catch (const json::exception&) {
        r.fail("levels", "must be an array (per node) of arrays (per level) of node indices");
        out.clear();
    }
    return out;
}

std::optional<std::vector<std::vector<double>>> read_matrix(Reader& r, const std::string& key, std::size_t n) {
    const json* v = r.array(key, true);
    if (!v) return std::nullopt;
    try {
        auto m = v->get<std::vector<std::vector<double>>>();
        bool good = m.size() == n;
        for (const auto& row : m) good = good && row.size() == n;
        if (!good) {
            r.fail(key, "must be a " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
            return std::nullopt;
        }
        return m;
    } catch (const json::exception&) {
        r.fail(key, "must be a matrix of numbers");
        return std::nullopt;
    }
}

void read_rates(Reader& r, KalikowModel& model, std::size_t nodes) {
    const json* v = r.get("rates", false);
    if (!v) return;
    std::map<NodeId, double> rates;
    if (v->is_number() && v->get<double>() >= 0.0) {
        for (std::size_t i = 0; i < nodes; ++i) rates[NodeId(i)] = v->get<double>();
    } else if (v->is_array() && v->size() == nodes) {
        for (std::size_t i = 0; i < nodes; ++i) {
            if (!(*v)[i].is_number() || !((*v)[i].get<double>() >= 0.0)) {
                r.fail("rates[" + std::to_string(i) + "]", "must be >= 0");
                return;
            }
            rates[NodeId(i)] = (*v)[i].get<double>();
        }
    } else {
        r.fail("rates", "must be a number >= 0 or one number per node");
        return;
    }
    model.declare_rates(std::move(rates));
}

std::size_t node_count(Reader& r, std::size_t fallback) {
    const auto n = r.integer("nodes", fallback == 0, 1);
    return n ? std::size_t(*n) : fallback;
}

using Builder = std::function<std::shared_ptr<KalikowModel>(Reader&, std::vector<std::string>&)>;

std::shared_ptr<KalikowModel> build_constant(Reader& r, std::vector<std::string>&) {
    const auto nodes = node_count(r, 1);
    const auto rate = r.number("rate", true, Range::NonNegative);
    const auto bound = r.number("bound", false, Range::NonNegative);
    if (!rate) return nullptr;
    if (bound && *bound < *rate) {
        r.fail("bound", "must be >= rate");
        return nullptr;
    }
    return std::make_shared<TableModel>(TableModel::constant(nodes, *rate, bound.value_or(*rate)));
}

std::shared_ptr<KalikowModel> build_table(Reader& r, std::vector<std::string>& errors) {
    const json* list = r.array("tables", true);
    if (!list) return nullptr;
    std::map<NodeId, TableModel::NodeTable> tables;
    bool good = true;
    for (std::size_t k = 0; k < list->size(); ++k) {
        Reader t((*list)[k], r.at("tables") + "[" + std::to_string(k) + "]", errors);
        const auto node = t.integer("node", false, kAnyNode).value_or(std::int64_t(k));
        const auto bound = t.number("bound", true, Range::NonNegative);
        const json* entries = t.array("entries", true);
        TableModel::NodeTable table{bound.value_or(0.0), {}};
        double total = 0.0;
        if (entries) {
            for (std::size_t m = 0; m < entries->size(); ++m) {
                Reader e((*entries)[m], t.at("entries") + "[" + std::to_string(m) + "]", errors);
                TableModel::Entry entry;
                const auto w = e.number("weight", true, Range::Unit);
                entry.weight = w.value_or(0.0);
                total += entry.weight;
                entry.base = e.number_or("base", 0.0, Range::NonNegative);
                entry.slope = e.number_or("slope", 0.0);
                std::vector<NeighborhoodPiece> pieces;
                if (const json* ps = e.array("pieces", false)) {
                    for (std::size_t q = 0; q < ps->size(); ++q) {
                        Reader p((*ps)[q], e.at("pieces") + "[" + std::to_string(q) + "]", errors);
                        const auto j = p.integer("node", true, kAnyNode);
                        const auto lo = p.number("lo", true);
                        const auto hi = p.number("hi", true);
                        if (lo && hi && !(*lo < *hi && *hi <= 0.0)) p.fail("", "need lo < hi <= 0");
                        p.finish();
                        if (j && lo && hi) pieces.push_back({NodeId(*j), {*lo, *hi}});
                    }
                }
                e.finish();
                entry.neighborhood = Neighborhood(std::move(pieces));
                table.entries.push_back(std::move(entry));
            }
            if (std::abs(total - 1.0) > 1e-9) {
                std::ostringstream os;
                os << std::setprecision(17) << "weights sum to " << total << ", expected 1 within 1e-9";
                t.fail("entries", os.str());
                good = false;
            }
        }
        t.finish();
        tables[NodeId(node)] = std::move(table);
    }
    if (!good) return nullptr;
    return std::make_shared<TableModel>(std::move(tables));
}

std::shared_ptr<KalikowModel> build_linear(Reader& r, std::vector<std::string>& errors) {
    const auto mu = r.numbers("mu", true, Range::NonNegative);
    const auto eps = r.number("epsilon", true, Range::Positive);
    LinearWeights weights;
    if (auto w = r.child("weights", false)) {
        weights.empty = w->number_or("empty", weights.empty, Range::Unit);
        weights.ratio = w->number("ratio", false, Range::OpenUnit);
        w->finish();
    }
    if (!mu) return nullptr;
    auto kernels = read_kernels(r, mu->size(), errors);
    if (!eps) return nullptr;
    auto model = std::make_shared<LinearHawkesModel>(*mu, std::move(kernels), *eps, weights);
    read_rates(r, *model, mu->size());
    return model;
}

std::shared_ptr<KalikowModel> build_analytic(Reader& r, std::vector<std::string>& errors) {
    std::size_t nodes = 0;
    if (r.has("psi") && r.get("psi", false)->is_array()) nodes = r.get("psi", false)->size();
    nodes = node_count(r, nodes);
    auto psi = read_psi_list(r, nodes, errors);
    auto kernels = read_kernels(r, nodes, errors);
    const auto eps = r.number("epsilon", true, Range::Positive);
    const auto radius = r.number_or("radius", std::numeric_limits<double>::infinity(), Range::Positive);
    AnalyticWeights weights;
    if (auto w = r.child("weights", false)) {
        weights.order_ratio = w->number_or("order_ratio", weights.order_ratio, Range::OpenUnit);
        weights.ratio = w->number("ratio", false, Range::OpenUnit);
        w->finish();
    }
    if (psi.size() != nodes || !eps) return nullptr;
    auto model = std::make_shared<AnalyticHawkesModel>(std::move(psi), std::move(kernels), *eps, radius, weights);
    read_rates(r, *model, nodes);
    return model;
}

std::shared_ptr<KalikowModel> build_age(Reader& r, std::vector<std::string>& errors) {
    const auto nodes = node_count(r, 0);
    std::optional<RateFunction> psi;
    if (auto p = r.child("psi", true)) psi = read_psi(*p);
    const auto delta = r.number("delta", true, Range::Positive);
    auto kernels = read_kernels(r, nodes, errors);
    auto levels = read_levels(r, nodes);
    AgeHawkesModel::Bounds bounds = AgeHawkesModel::GammaBarBounds{};
    if (auto b = r.child("bounds", false)) {
        const auto type = b->string("type", true).value_or("gamma_bar");
        if (type == "power_law") {
            const auto c = b->number("constant", true, Range::Positive);
            const auto p = b->number("exponent", true, Range::Positive);
            if (c && p) bounds = AgeHawkesModel::PowerLawBounds{*c, *p};
        } else if (type != "gamma_bar") {
            b->fail("type", "unknown bounds '" + type + "' (gamma_bar, power_law)");
        }
        b->finish();
    }
    if (!psi || !delta || nodes == 0) return nullptr;
    auto network = std::make_shared<FiniteAgeNetwork>(std::move(kernels), std::move(levels));
    return std::make_shared<AgeHawkesModel>(*psi, std::move(network), *delta, bounds);
}

std::shared_ptr<KalikowModel> build_gl(Reader& r, std::vector<std::string>& errors) {
    std::size_t nodes = 0;
    if (r.has("beta") && r.get("beta", false)->is_array()) nodes = r.get("beta", false)->size();
    nodes = node_count(r, nodes);
    auto psi = read_psi_list(r, nodes, errors);
    const auto beta = read_matrix(r, "beta", nodes);
    const auto thresholds = read_matrix(r, "thresholds", nodes);
    const auto delta = r.number("delta", true, Range::Positive);
    auto levels = read_levels(r, nodes);
    GLWeights weights;
    if (auto w = r.child("weights", false)) {
        weights.empty = w->number_or("empty", weights.empty, Range::OpenUnit);
        weights.ratio = w->number_or("ratio", weights.ratio, Range::OpenUnit);
        w->finish();
    }
    if (psi.size() != nodes || !beta || !thresholds || !delta) return nullptr;
    auto model = std::make_shared<GLModel>(std::move(psi), *beta, *thresholds, *delta, std::move(levels), weights);
    read_rates(r, *model, nodes);
    return model;
}

std::shared_ptr<KalikowModel> build_lattice(Reader& r, std::vector<std::string>&) {
    const auto decay = r.number_or("decay", 4.0, Range::Positive);
    const auto exponent = r.number_or("exponent", decay, Range::Positive);
    const auto delta = r.number("delta", true, Range::Positive);
    if (!delta) return nullptr;
    if (!(decay > 1.0)) {
        r.fail("decay", "must be > 1");
        return nullptr;
    }
    if (!(exponent > 1.0 && exponent <= decay)) {
        r.fail("exponent", "must lie in (1, decay]");
        return nullptr;
    }
    return std::make_shared<AgeHawkesModel>(make_lattice_model(decay, exponent, *delta));
}

const std::vector<std::pair<std::string, Builder>>& builders() {
    static const std::vector<std::pair<std::string, Builder>> list{
        {"constant", build_constant}, {"table", build_table}, {"linear", build_linear},
        {"analytic", build_analytic}, {"age", build_age},     {"gl", build_gl},
        {"lattice-4.2.6", build_lattice}};
    return list;
}

SubspaceGuard read_guard(Reader& r) {
    const auto type = r.string("type", true).value_or("none");
    SubspaceGuard out;
    if (type == "activity") {
        const auto horizon = r.number("horizon", true, Range::Positive);
        const auto cap = r.integer("cap", true, 1);
        if (horizon && cap) out = SubspaceGuard::activity(*horizon, std::size_t(*cap));
    } else if (type == "refractory") {
        if (const auto d = r.number("delta", true, Range::Positive)) out = SubspaceGuard::refractory(*d);
    } else if (type != "none") {
        r.fail("type", "unknown guard '" + type + "' (none, activity, refractory)");
    }
    r.finish();
    return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error("invalid config:\n  " + join(problems, "\n  ")), problems_(std::move(problems)) {}

std::vector<std::string> model_families() {
    std::vector<std::string> out;
    for (const auto& [name, b] : builders()) out.push_back(name);
    return out;
}

RunConfig parse_config(const json& doc) {
    std::vector<std::string> errors;
    RunConfig cfg;
    cfg.source = doc;
    Reader top(doc, "", errors);
    if (!top.ok()) throw ConfigError({"config: top level must be a JSON object"});

    if (auto m = top.child("model", true)) {
        const auto family = m->string("family", true);
        if (auto g = m->child("guard", false)) cfg.guard = read_guard(*g);
        if (family) {
            cfg.family = *family;
            const auto it = std::find_if(builders().begin(), builders().end(),
                                         [&](const auto& b) { return b.first == *family; });
            if (it == builders().end()) {
                m->fail("family", "unknown family '" + *family + "' (" + join(model_families(), ", ") + ")");
            } else {
                const auto before = errors.size();
                try {
                    auto model = it->second(*m, errors);
                    if (model && errors.size() == before) cfg.model = std::move(model);
                } catch (const std::invalid_argument& e) {
                    m->fail("", e.what());
                }
                // Leftover keys are only meaningful once the family parsed cleanly.
                if (errors.size() == before) m->finish();
            }
        }
    }

    if (auto s = top.child("simulation", false)) {
        auto& sim = cfg.simulation;
        sim.t_max = s->number_or("t_max", sim.t_max, Range::Positive);
        if (!std::isfinite(sim.t_max)) s->fail("t_max", "must be finite");
        if (const auto n = s->integer("n_max", false, 1)) sim.n_max = std::size_t(*n);
        sim.node = NodeId(s->integer("node", false, kAnyNode).value_or(0));
        if (const json* v = s->array("nodes", false)) {
            try {
                sim.nodes = v->get<std::vector<NodeId>>();
            } catch (const json::exception&) {
                s->fail("nodes", "must be an array of node indices");
            }
        }
        if (const json* v = s->array("window", false)) {
            for (std::size_t k = 0; k < v->size(); ++k) {
                Reader w((*v)[k], s->at("window") + "[" + std::to_string(k) + "]", errors);
                const auto node = w.integer("node", true, kAnyNode);
                const auto lo = w.number("lo", true);
                const auto hi = w.number("hi", true);
                if (lo && hi && !(*lo < *hi)) w.fail("", "need lo < hi");
                w.finish();
                if (node && lo && hi) sim.window.push_back({NodeId(*node), {*lo, *hi}});
            }
        }
        if (auto b = s->child("budget", false)) {
            if (const auto g = b->integer("max_generations", false, 1)) sim.budget.max_generations = std::size_t(*g);
            if (const auto p = b->integer("max_points", false, 1)) sim.budget.max_points = std::size_t(*p);
            b->finish();
        }
        s->finish();
    }

    if (auto r = top.child("rng", false)) {
        if (const json* v = r->get("seed", false)) {
            if (v->is_number_unsigned()) {
                cfg.rng.seed = v->get<std::uint64_t>();
            } else {
                r->fail("seed", "must be a nonnegative integer");
            }
        }
        if (const auto n = r->integer("runs", false, 1)) cfg.rng.runs = std::size_t(*n);
        r->finish();
    }

    if (auto o = top.child("output", false)) {
        cfg.output.points = o->string("points", false).value_or(cfg.output.points);
        cfg.output.summary = o->string("summary", false);
        cfg.output.ledger = o->string("ledger", false);
        o->finish();
    }
    top.finish();

    if (cfg.model && cfg.simulation.nodes.empty()) {
        if (const auto all = cfg.model->nodes()) cfg.simulation.nodes = *all;
    }
    if (!errors.empty()) throw ConfigError(std::move(errors));
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({path + ": cannot open file"});
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw ConfigError({path + ": " + e.what()});
    }
    return parse_config(doc);
}

}  // namespace kalikow
