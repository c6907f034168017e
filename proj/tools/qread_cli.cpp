// Command-line front end: every figure-style result is a CSV-emitting
// subcommand driven by key=value pairs. All randomness flows from one seed
// through named sub-streams, and reruns with the same configuration produce
// byte-identical output.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qread/qread.hpp"

namespace {

using namespace qread;

class cli_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class Config {
  public:
    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string str(const std::string& key, const std::string& fallback) {
        resolved_[key] = values_.count(key) ? values_.at(key) : fallback;
        return resolved_[key];
    }
    std::string str_required(const std::string& key) {
        if (!values_.count(key)) throw cli_error("missing required key `" + key + "`");
        resolved_[key] = values_.at(key);
        return resolved_[key];
    }

    double real(const std::string& key, double fallback) {
        if (!values_.count(key)) {
            resolved_[key] = format_real(fallback);
            return fallback;
        }
        return parse_real(key, values_.at(key));
    }
    double real_required(const std::string& key) {
        if (!values_.count(key)) throw cli_error("missing required key `" + key + "`");
        return parse_real(key, values_.at(key));
    }

    long long integer(const std::string& key, long long fallback) {
        if (!values_.count(key)) {
            resolved_[key] = std::to_string(fallback);
            return fallback;
        }
        return parse_integer(key, values_.at(key));
    }
    long long integer_required(const std::string& key) {
        if (!values_.count(key)) throw cli_error("missing required key `" + key + "`");
        return parse_integer(key, values_.at(key));
    }

    std::uint64_t seed(const std::string& key, std::uint64_t fallback) {
        if (!values_.count(key)) {
            resolved_[key] = std::to_string(fallback);
            return fallback;
        }
        try {
            const std::uint64_t v = std::stoull(values_.at(key));
            resolved_[key] = std::to_string(v);
            return v;
        } catch (const std::exception&) {
            throw cli_error("key `" + key + "` is not an unsigned integer: " + values_.at(key));
        }
    }

    std::vector<double> real_list_required(const std::string& key) {
        if (!values_.count(key)) throw cli_error("missing required key `" + key + "`");
        const std::string raw = values_.at(key);
        std::vector<double> out;
        std::stringstream ss(raw);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (item.empty()) continue;
            out.push_back(parse_real_item(key, item));
        }
        if (out.empty()) throw cli_error("key `" + key + "` needs at least one value");
        resolved_[key] = raw;
        return out;
    }

    std::vector<int> int_list_required(const std::string& key) {
        if (!values_.count(key)) throw cli_error("missing required key `" + key + "`");
        const std::string raw = values_.at(key);
        std::vector<int> out;
        std::stringstream ss(raw);
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (item.empty()) continue;
            try {
                out.push_back(std::stoi(item));
            } catch (const std::exception&) {
                throw cli_error("key `" + key + "` holds a non-integer entry: " + item);
            }
        }
        if (out.empty()) throw cli_error("key `" + key + "` needs at least one value");
        resolved_[key] = raw;
        return out;
    }

    void reject_unknown(const std::set<std::string>& allowed) const {
        for (const auto& [key, value] : values_) {
            if (!allowed.count(key)) throw cli_error("unknown key `" + key + "`");
        }
    }

    void note(const std::string& key, const std::string& value) { resolved_[key] = value; }

    void write_header(std::ostream& os, const std::string& subcommand) const {
        os << "# qread " << subcommand << "\n";
        for (const auto& [key, value] : resolved_) os << "# " << key << "=" << value << "\n";
    }

  private:
    double parse_real(const std::string& key, const std::string& raw) {
        const double v = parse_real_item(key, raw);
        resolved_[key] = raw;
        return v;
    }
    double parse_real_item(const std::string& key, const std::string& raw) {
        try {
            std::size_t used = 0;
            const double v = std::stod(raw, &used);
            if (used != raw.size()) throw std::invalid_argument(raw);
            return v;
        } catch (const std::exception&) {
            throw cli_error("key `" + key + "` is not a number: " + raw);
        }
    }
    long long parse_integer(const std::string& key, const std::string& raw) {
        try {
            std::size_t used = 0;
            const long long v = std::stoll(raw, &used);
            if (used != raw.size()) throw std::invalid_argument(raw);
            resolved_[key] = raw;
            return v;
        } catch (const std::exception&) {
            throw cli_error("key `" + key + "` is not an integer: " + raw);
        }
    }

    std::map<std::string, std::string> values_;
    std::map<std::string, std::string> resolved_;
};

Config parse_args(int argc, char** argv) {
    Config config;
    std::map<std::string, std::string> overrides;
    for (int i = 2; i < argc; ++i) {
        const std::string arg = argv[i];
        const std::size_t eq = arg.find('=');
        if (eq == std::string::npos || eq == 0) throw cli_error("arguments must be key=value pairs, got: " + arg);
        overrides[arg.substr(0, eq)] = arg.substr(eq + 1);
    }
    if (overrides.count("config")) {
        std::ifstream file(overrides.at("config"));
        if (!file) throw cli_error("cannot open config file " + overrides.at("config"));
        std::string line;
        while (std::getline(file, line)) {
            if (line.empty() || line[0] == '#') continue;
            const std::size_t eq = line.find('=');
            if (eq == std::string::npos || eq == 0) throw cli_error("config file line is not key=value: " + line);
            config.set(line.substr(0, eq), line.substr(eq + 1));
        }
        overrides.erase("config");
    }
    for (const auto& [key, value] : overrides) config.set(key, value); // flags override file
    return config;
}

struct ModelChoice {
    bool is_model1 = false;
};

ModelChoice parse_model(Config& config) {
    const std::string name = config.str_required("model");
    if (name == "I" || name == "1") return {true};
    if (name == "II" || name == "2") return {false};
    throw cli_error("model must be I or II, got: " + name);
}

struct SampleBudget {
    long long M = 0;
    double epsilon = 0.0;
    double delta = 0.0;
};

SampleBudget parse_budget(Config& config) {
    SampleBudget budget;
    budget.delta = config.real("delta", 0.01);
    if (config.has("M")) {
        budget.M = config.integer_required("M");
        if (budget.M < 1) throw cli_error("M must be positive");
        budget.epsilon = hoeffding_epsilon(budget.M, budget.delta);
        config.note("eps", format_real(budget.epsilon));
    } else {
        budget.epsilon = config.real("eps", 0.02);
        budget.M = hoeffding_samples(budget.epsilon, budget.delta);
        config.note("M", std::to_string(budget.M));
    }
    return budget;
}

std::uint64_t row_key(std::uint64_t stream_key, std::uint64_t row) { return mix64(stream_key ^ mix64(row + 1)); }

std::unique_ptr<std::ofstream> file_sink;

std::ostream& open_sink(Config& config) {
    const std::string path = config.str("out", "-");
    if (path == "-") return std::cout;
    file_sink = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*file_sink) throw cli_error("cannot open output file " + path);
    return *file_sink;
}

// ---------------------------------------------------------------------------

int cmd_mi_sweep(Config& config) {
    config.reject_unknown({"model", "x", "T", "Tmax", "points", "a", "phi", "eta", "eps", "delta", "M", "seed",
                           "workers", "out"});
    const ModelChoice model = parse_model(config);
    const std::vector<double> xs = config.real_list_required("x");
    const double eta = config.real("eta", 1.0);
    const SampleBudget budget = parse_budget(config);
    const std::uint64_t seed = config.seed("seed", 0);
    const int workers = static_cast<int>(config.integer("workers", 1));
    if (model.is_model1 && (config.has("a") || config.has("phi"))) {
        throw cli_error("a/phi apply to model II only");
    }
    if (config.has("a") && config.has("phi")) throw cli_error("provide a or phi, not both");
    const bool scaled_field = config.has("a");
    const double a = scaled_field ? config.real_required("a") : 0.0;
    const double phi_fixed = config.has("phi") ? config.real_required("phi") : 0.0;
    if (!model.is_model1 && !config.has("a") && !config.has("phi")) config.note("phi", "0");

    if (config.has("T") == config.has("Tmax")) throw cli_error("provide exactly one of T or Tmax");
    std::vector<std::vector<int>> T_per_x;
    if (config.has("T")) {
        const std::vector<int> T_list = config.int_list_required("T");
        for (std::size_t i = 0; i < xs.size(); ++i) T_per_x.push_back(T_list);
    } else {
        // ladder of shared x^2 T targets so curves at different x can be
        // compared at equal scaling abscissa
        const long long Tmax = config.integer_required("Tmax");
        const long long points = config.integer("points", 8);
        if (Tmax < 1 || points < 1) throw cli_error("Tmax and points must be positive");
        double x2_min = xs[0] * xs[0];
        for (double x : xs) x2_min = std::min(x2_min, x * x);
        for (double x : xs) {
            std::vector<int> ladder;
            for (long long j = 1; j <= points; ++j) {
                const double x2t = static_cast<double>(Tmax) * x2_min * static_cast<double>(j) / static_cast<double>(points);
                const int T = static_cast<int>(std::max<long long>(1, std::llround(x2t / (x * x))));
                if (ladder.empty() || ladder.back() != T) ladder.push_back(T);
            }
            T_per_x.push_back(ladder);
        }
    }

    std::ostream& os = open_sink(config);
    config.write_header(os, "mi-sweep");
    os << "x,T,x2T,mi,epsilon,delta,M\n";
    const Prior prior = Prior::spin_up_down();
    const std::uint64_t mi_key = substream_key(seed, "mi");
    std::uint64_t row = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double x = xs[i];
        const double phi = scaled_field ? a * x * x : phi_fixed;
        const KrausSet set = model.is_model1 ? kraus_set_model1({x}) : kraus_set_model2({x, phi});
        for (int T : T_per_x[i]) {
            const EstimateWithBound est =
                estimate_mi(set, prior, T, eta, budget.M, row_key(mi_key, row++), budget.delta, workers);
            os << format_real(x) << "," << T << "," << format_real(x * x * T) << "," << format_real(est.value) << ","
               << format_real(est.epsilon) << "," << format_real(est.delta) << "," << est.samples << "\n";
        }
    }
    return 0;
}

int cmd_plateau_compare(Config& config) {
    config.reject_unknown({"model", "eta", "alpha", "x", "x2T", "eps", "delta", "M", "seed", "workers", "out"});
    const ModelChoice model = parse_model(config);
    const std::vector<double> etas = config.real_list_required("eta");
    if (model.is_model1 && config.has("alpha")) throw cli_error("alpha applies to model II only");
    const double alpha = model.is_model1 ? 0.0 : config.real("alpha", 10.0);
    const double x = config.real("x", 0.1);
    const double x2T = config.real("x2T", 10.0);
    const SampleBudget budget = parse_budget(config);
    const std::uint64_t seed = config.seed("seed", 0);
    const int workers = static_cast<int>(config.integer("workers", 1));
    const int T = static_cast<int>(std::max<long long>(1, std::llround(x2T / (x * x))));

    std::ostream& os = open_sink(config);
    config.write_header(os, "plateau-compare");
    os << "model,eta,alpha,x,x2T,mi_numeric,mi_theory,ratio,diverges\n";
    const Prior prior = Prior::spin_up_down();
    const std::uint64_t mi_key = substream_key(seed, "mi");
    std::uint64_t row = 0;
    for (double eta : etas) {
        if (eta < 0.0 || eta > 1.0) throw cli_error("eta must lie in [0, 1]");
        const double phi = alpha * x * x / 2.0; // alpha = omega tau/2 and dt/tau = x^2/4
        const KrausSet set = model.is_model1 ? kraus_set_model1({x}) : kraus_set_model2({x, phi});
        const EstimateWithBound est =
            estimate_mi(set, prior, T, eta, budget.M, row_key(mi_key, row++), budget.delta, workers);
        const PlateauResult theory =
            mi_plateau({model.is_model1 ? SmeModel::model1 : SmeModel::model2, 1.0, eta, alpha});
        const double numeric = est.value;
        const double ratio =
            eta > 0.0 && theory.mi_bits > 0.0 ? numeric / theory.mi_bits : std::numeric_limits<double>::quiet_NaN();
        os << (model.is_model1 ? "I" : "II") << "," << format_real(eta) << ","
           << (model.is_model1 ? "nan" : format_real(alpha)) << "," << format_real(x) << "," << format_real(x2T)
           << "," << format_real(numeric) << "," << format_real(eta > 0.0 ? theory.mi_bits : 0.0) << ","
           << format_real(ratio) << "," << (theory.diverges ? 1 : 0) << "\n";
    }
    return 0;
}

int cmd_nonmonotone_scan(Config& config) {
    config.reject_unknown({"model", "phi", "T", "x", "eta", "prior", "eps", "delta", "M", "seed", "workers", "out"});
    const std::string model_name = config.str("model", "II");
    if (model_name != "II" && model_name != "2") throw cli_error("nonmonotone-scan runs model II only");
    const std::vector<double> phis = config.real_list_required("phi");
    const std::vector<double> xs = config.real_list_required("x");
    const int T = static_cast<int>(config.integer_required("T"));
    const double eta = config.real("eta", 1.0);
    const std::string prior_name = config.str("prior", "updown");
    const SampleBudget budget = parse_budget(config);
    const std::uint64_t seed = config.seed("seed", 0);
    const int workers = static_cast<int>(config.integer("workers", 1));
    for (double phi : phis) {
        if (phi < 0.0 || phi >= 1.5707963267948966) throw cli_error("phi must lie in [0, pi/2)");
    }
    if (T < 0) throw cli_error("T must be nonnegative");
    if (prior_name != "updown" && prior_name != "transverse") {
        throw cli_error("prior must be updown or transverse");
    }

    std::ostream& os = open_sink(config);
    config.write_header(os, "nonmonotone-scan");
    os << "phi,x,T,x_sqrtT,mi,epsilon,delta,M\n";
    const Prior prior = prior_name == "updown" ? Prior::spin_up_down() : Prior::spin_transverse();
    const std::uint64_t mi_key = substream_key(seed, "mi");
    std::uint64_t row = 0;
    for (double phi : phis) {
        for (double x : xs) {
            const KrausSet set = kraus_set_model2({x, phi});
            const EstimateWithBound est =
                estimate_mi(set, prior, T, eta, budget.M, row_key(mi_key, row++), budget.delta, workers);
            os << format_real(phi) << "," << format_real(x) << "," << T << "," << format_real(x * std::sqrt(T)) << ","
               << format_real(est.value) << "," << format_real(est.epsilon) << "," << format_real(est.delta) << ","
               << est.samples << "\n";
        }
    }
    return 0;
}

int cmd_xi(Config& config) {
    config.reject_unknown({"model", "x", "phi", "out"});
    const ModelChoice model = parse_model(config);
    const std::vector<double> xs = config.real_list_required("x");
    std::vector<double> phis = {0.0};
    if (config.has("phi")) {
        if (model.is_model1) throw cli_error("phi applies to model II only");
        phis = config.real_list_required("phi");
    } else {
        config.note("phi", "0");
    }

    std::ostream& os = open_sink(config);
    config.write_header(os, "xi");
    os << "x,phi,xi,lambda2_re,lambda2_im\n";
    for (double x : xs) {
        for (double phi : phis) {
            const KrausSet set = model.is_model1 ? kraus_set_model1({x}) : kraus_set_model2({x, phi});
            const SpectralReport report = correlation_length(mean_channel(set));
            os << format_real(x) << "," << format_real(phi) << "," << format_real(report.xi) << ","
               << format_real(std::real(report.lambda2)) << "," << format_real(std::imag(report.lambda2)) << "\n";
        }
    }
    return 0;
}

int cmd_sme_ensemble(Config& config) {
    config.reject_unknown({"model", "eta", "tau", "alpha", "omega", "paths", "dt", "t", "seed", "init", "out"});
    const ModelChoice model = parse_model(config);
    SmeConfig sme;
    sme.model = model.is_model1 ? SmeModel::model1 : SmeModel::model2;
    sme.tau = config.real("tau", 1.0);
    if (config.has("omega") && config.has("alpha")) throw cli_error("provide alpha or omega, not both");
    if (model.is_model1 && (config.has("omega") || config.has("alpha"))) {
        throw cli_error("alpha/omega apply to model II only");
    }
    if (config.has("omega")) {
        sme.omega = config.real_required("omega");
    } else {
        const double alpha = config.real("alpha", 0.0);
        sme.omega = 2.0 * alpha / sme.tau;
    }
    sme.eta = config.real("eta", 1.0);
    sme.dt = config.real("dt", sme.tau / 1000.0);
    sme.t_final = config.real("t", 1.0);
    const std::uint64_t seed = config.seed("seed", 0);
    sme.seed = substream_key(seed, "sme");
    const long long paths = config.integer("paths", 1);
    if (paths < 1) throw cli_error("paths must be positive");
    const std::string init = config.str("init", "up");
    DensityMatrix rho0 = DensityMatrix::up();
    if (init == "down") rho0 = DensityMatrix::down();
    else if (init == "plusx") rho0 = DensityMatrix::plus_x();
    else if (init == "mixed") rho0 = DensityMatrix::maximally_mixed();
    else if (init != "up") throw cli_error("init must be one of up, down, plusx, mixed");
    sme.validate();

    std::ostream& os = open_sink(config);
    config.write_header(os, "sme-ensemble");
    const int n_ch = sme.channels();
    if (paths == 1) {
        os << "t,p0,px,py,pz";
        for (int ch = 0; ch < n_ch; ++ch) os << ",dy" << ch + 1;
        os << "\n";
        const SmePath path = integrate_sme(sme, rho0, 0);
        for (std::size_t k = 0; k < path.time.size(); ++k) {
            os << format_real(path.time[k]) << "," << format_real(path.states[k].p0) << ","
               << format_real(path.states[k].px) << "," << format_real(path.states[k].py) << ","
               << format_real(path.states[k].pz);
            for (int ch = 0; ch < n_ch; ++ch) {
                os << "," << format_real(k == 0 ? 0.0 : path.dy[k - 1][static_cast<std::size_t>(ch)]);
            }
            os << "\n";
        }
        return 0;
    }
    const long long n_steps = std::llround(sme.t_final / sme.dt);
    std::vector<std::array<double, 3>> mean(static_cast<std::size_t>(n_steps) + 1, {0.0, 0.0, 0.0});
    std::vector<std::array<double, 3>> sq(static_cast<std::size_t>(n_steps) + 1, {0.0, 0.0, 0.0});
    for (long long p = 0; p < paths; ++p) {
        const SmePath path = integrate_sme(sme, rho0, static_cast<std::uint64_t>(p));
        for (std::size_t k = 0; k < path.states.size(); ++k) {
            const double comps[3] = {path.states[k].px, path.states[k].py, path.states[k].pz};
            for (int c = 0; c < 3; ++c) {
                mean[k][static_cast<std::size_t>(c)] += comps[c];
                sq[k][static_cast<std::size_t>(c)] += comps[c] * comps[c];
            }
        }
    }
    os << "t,mean_px,mean_py,mean_pz,stderr_px,stderr_py,stderr_pz\n";
    for (std::size_t k = 0; k <= static_cast<std::size_t>(n_steps); ++k) {
        os << format_real(static_cast<double>(k) * sme.dt);
        double se[3];
        for (int c = 0; c < 3; ++c) {
            const double m = mean[k][static_cast<std::size_t>(c)] / static_cast<double>(paths);
            const double var = std::max(0.0, sq[k][static_cast<std::size_t>(c)] / static_cast<double>(paths) - m * m);
            se[c] = std::sqrt(var / static_cast<double>(paths));
            os << "," << format_real(m);
        }
        for (int c = 0; c < 3; ++c) os << "," << format_real(se[c]);
        os << "\n";
    }
    return 0;
}

int cmd_overfit(Config& config) {
    config.reject_unknown({"model", "x", "phi", "eta", "n", "T", "iters", "lr", "l2", "seed", "out"});
    const ModelChoice model = parse_model(config);
    if (model.is_model1 && config.has("phi")) throw cli_error("phi applies to model II only");
    const double x = config.real_required("x");
    const double phi = config.real("phi", 0.0);
    const double eta = config.real("eta", 1.0);
    const long long n = config.integer("n", 10000);
    const std::vector<int> T_list = config.int_list_required("T");
    const int iters = static_cast<int>(config.integer("iters", 500));
    const double lr = config.real("lr", 0.1);
    const double l2 = config.real("l2", 0.0);
    const std::uint64_t seed = config.seed("seed", 0);
    const KrausSet set = model.is_model1 ? kraus_set_model1({x}) : kraus_set_model2({x, phi});

    std::ostream& os = open_sink(config);
    config.write_header(os, "overfit");
    os << "T,train_acc,test_acc,bayes_acc,bayes_eps\n";
    const auto rows = overfit_experiment(set, Prior::spin_up_down(), eta, T_list, n, n,
                                         substream_key(seed, "ml"), l2, iters, lr);
    for (const auto& row : rows) {
        os << row.T << "," << format_real(row.train_acc) << "," << format_real(row.test_acc) << ","
           << format_real(row.bayes_acc) << "," << format_real(row.bayes_eps) << "\n";
    }
    return 0;
}

int cmd_accuracy(Config& config) {
    config.reject_unknown({"model", "x", "phi", "eta", "T", "eps", "delta", "M", "seed", "workers", "out"});
    const ModelChoice model = parse_model(config);
    if (model.is_model1 && config.has("phi")) throw cli_error("phi applies to model II only");
    const double x = config.real_required("x");
    const double phi = config.real("phi", 0.0);
    const double eta = config.real("eta", 1.0);
    const std::vector<int> T_list = config.int_list_required("T");
    const SampleBudget budget = parse_budget(config);
    const std::uint64_t seed = config.seed("seed", 0);
    const int workers = static_cast<int>(config.integer("workers", 1));
    const KrausSet set = model.is_model1 ? kraus_set_model1({x}) : kraus_set_model2({x, phi});

    std::ostream& os = open_sink(config);
    config.write_header(os, "accuracy");
    os << "T,accuracy,epsilon,delta,M\n";
    const std::uint64_t acc_key = substream_key(seed, "acc");
    std::uint64_t row = 0;
    for (int T : T_list) {
        const EstimateWithBound est = estimate_accuracy(set, Prior::spin_up_down(), T, eta, budget.M,
                                                        row_key(acc_key, row++), budget.delta, workers);
        os << T << "," << format_real(est.value) << "," << format_real(est.epsilon) << "," << format_real(est.delta)
           << "," << est.samples << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    const std::string usage =
        "usage: qread <subcommand> key=value...\n"
        "subcommands: mi-sweep, plateau-compare, nonmonotone-scan, xi, sme-ensemble, overfit, accuracy\n";
    if (argc < 2) {
        std::cerr << usage;
        return 2;
    }
    const std::string subcommand = argv[1];
    try {
        Config config = parse_args(argc, argv);
        int code = 2;
        if (subcommand == "mi-sweep") code = cmd_mi_sweep(config);
        else if (subcommand == "plateau-compare") code = cmd_plateau_compare(config);
        else if (subcommand == "nonmonotone-scan") code = cmd_nonmonotone_scan(config);
        else if (subcommand == "xi") code = cmd_xi(config);
        else if (subcommand == "sme-ensemble") code = cmd_sme_ensemble(config);
        else if (subcommand == "overfit") code = cmd_overfit(config);
        else if (subcommand == "accuracy") code = cmd_accuracy(config);
        else {
            std::cerr << "unknown subcommand: " << subcommand << "\n" << usage;
            return 2;
        }
        if (file_sink) file_sink->flush();
        return code;
    } catch (const cli_error& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    } catch (const validation_error& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
}
