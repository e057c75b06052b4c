// rsl: command-line runner for the radial-extension experiments.

#include "rsl/experiments.hpp"
#include "rsl/functions.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

using namespace rsl;

namespace {

struct RunConfig {
    std::string experiment;
    int n = 2;
    double s = 0.5;
    double p = 2.0;
    double a = 0.0;
    std::string f;
    long samples = 200000;
    std::uint64_t seed = 42;
    int threads = 1;
    std::string estimator = "radial-importance";
    double beta = 0.0;
    double truncation_radius = 4.0;
    double origin_exclusion = 1e-6;
    int j = 1;
    std::string branch = "both";
    int jmax = 12;
    int pairs = 10000;
    int family_size = 32;
    std::string geometry = "ball";
    std::string alpha;
    double h = 3e-4;
    int points = 100;
    double target_r = 0.5;
    std::string output;
    std::string format = "json";
    std::string config;
};

struct Subcommand {
    const char* name;
    const char* summary;
    const char* formula;
};

const Subcommand kSubcommands[] = {
    {"verify-lp-identity", "Lp identity for U_a on the ball",
     "int_B |U_a f|^p dX = ||f||_{L^p(dB)}^p / (n + a p), with U_a f(X) = |X|^a f(X/|X|)"},
    {"verify-decomposition", "seminorm decomposition of |U_a f|_{W^{s,p}(B)}^p",
     "|U_a f|^p = 2/(n-(s-a)p) int int int_0^1 k(x,y,t) dt dsigma dsigma, split into I1 (t<1/2), I2, I3"},
    {"kernel-bound", "kernel bound on random sphere pairs",
     "L(x,y) = int_{1/2}^1 |x - t y|^{-(n+sp)} dt <= C |x-y|^{-(n-1+sp)}, "
     "C = 2^{(n-1+sp)/2} int_R (1+tau^2)^{-(n+sp)/2} dtau"},
    {"compute-j", "finiteness and y-independence of J",
     "J = int_{1/2}^1 int_{dB} (1-t)^p / |x - t y|^{n+sp} dsigma(x) dt, finite iff p - sp > 0"},
    {"scaling-law", "annulus scaling of the top-order seminorm",
     "|U_a f|_{W^{s,p}(Omega_j)}^p = 2^{j[(s-a)p-n]} |U_a f|_{W^{s,p}(Omega_0)}^p, "
     "Omega_j = {2^{-j-1} < |X| < 2^{-j}}"},
    {"divergence", "divergence of the dyadic annulus sum",
     "sum_j 2^{j[(s-a)p-n]} |U_a f|_{Omega_0}^p diverges iff (s-a)p >= n"},
    {"operator-sweep", "empirical operator-norm ratios over a random family",
     "R(f) = ||U_a f||_{W^{s,p}(B)} / ||f||_{W^{s,p}(dB)} (cube: ||T f||_{W^{s,p}(Q)} / ||f||_{W^{s,p}(dQ)})"},
    {"derivative-check", "derivative recursion for V_a g against finite differences",
     "d^alpha [X_n^a g(X'/X_n)] = sum_{|beta'|<=|alpha|} X_n^{a-|alpha|} P_{alpha,beta'}(X'/X_n) d^beta' g(X'/X_n); "
     "int_0^1 X_n^{n-1+(a-|alpha|)p} dX_n = 1/(n+(a-|alpha|)p) iff (|alpha|-a)p < n"},
    {"solve-epsilon", "chart radius solve",
     "r(eps) = 2 eps sqrt(1-eps^2) / (1 - 2 eps^2) = target_r"},
};

std::string default_function(const std::string& experiment)
{
    if (experiment == "verify-lp-identity")
        return "constant";
    if (experiment == "derivative-check")
        return "bump:radius=0.4,order=3";
    return "coordinate:1";
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

/// key = value lines; '#' starts a comment. Options already given on the
/// command line win.
void apply_config_file(CLI::App& sub, const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot read config file '" + path + "'");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        while (!key.empty() && key.front() == '-')
            key.erase(key.begin());
        std::replace(key.begin(), key.end(), '_', '-');
        if (key == "config")
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": nested config files are not supported");
        CLI::Option* opt = sub.get_option_no_throw("--" + key);
        if (!opt)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "' for " +
                                     sub.get_name());
        if (opt->count() > 0)
            continue;
        opt->add_result(value);
        opt->run_callback();
    }
}

void add_common(CLI::App& sub, RunConfig& rc, bool needs_function, bool needs_estimator)
{
    sub.add_option("--n", rc.n, "ambient dimension n")->check(CLI::Range(2, kMaxDim));
    sub.add_option("--s", rc.s, "smoothness s > 0");
    sub.add_option("--p", rc.p, "exponent p >= 1");
    sub.add_option("--a", rc.a, "homogeneity degree a");
    if (needs_function)
        sub.add_option("--f", rc.f,
                       "test function: constant[:c] | coordinate:i | bump[:radius=..,order=..,center=a;b,cap] | "
                       "cusp[:gamma=..,anchor=..] | random_mix[:seed=..,count=..,cap]");
    if (needs_estimator) {
        sub.add_option("--samples", rc.samples, "Monte Carlo samples (>= 1000)");
        sub.add_option("--threads", rc.threads, "worker threads; results do not depend on it")
            ->check(CLI::PositiveNumber);
        sub.add_option("--estimator", rc.estimator, "uniform-pair | radial-importance")
            ->check(CLI::IsMember({"uniform-pair", "radial-importance"}));
        sub.add_option("--beta", rc.beta, "radial importance exponent; 0 selects p(1-sigma)");
        sub.add_option("--truncation-radius", rc.truncation_radius, "outer radius for plane Gagliardo tails");
        sub.add_option("--origin-exclusion", rc.origin_exclusion, "radius of the ball removed when a < 0");
    }
    sub.add_option("--seed", rc.seed, "RNG seed (default: $RSL_SEED or 42)");
    sub.add_option("--output", rc.output, "report path (written atomically); stdout when absent");
    sub.add_option("--format", rc.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
    sub.add_option("--config", rc.config, "key = value file with flag values; flags override it");
}

EstimatorConfig estimator(const RunConfig& rc)
{
    EstimatorConfig c;
    c.samples = rc.samples;
    c.mode = parse_mode(rc.estimator);
    c.importance_exponent = rc.beta;
    c.truncation_radius = rc.truncation_radius;
    c.seed = rc.seed;
    c.threads = rc.threads;
    c.origin_exclusion = rc.origin_exclusion;
    return c;
}

MultiIndex parse_alpha(const std::string& text, int n)
{
    std::vector<int> parts;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty())
            continue;
        std::size_t used = 0;
        const int v = std::stoi(item, &used);
        if (used != item.size() || v < 0)
            throw std::invalid_argument("alpha entries must be nonnegative integers: '" + text + "'");
        parts.push_back(v);
    }
    if (static_cast<int>(parts.size()) != n)
        throw std::invalid_argument("alpha needs n = " + std::to_string(n) + " comma-separated entries");
    MultiIndex m(n);
    for (int i = 0; i < n; ++i)
        m[i] = parts[i];
    return m;
}

Report run(const RunConfig& rc)
{
    const std::string fspec = rc.f.empty() ? default_function(rc.experiment) : rc.f;
    const CapChart chart = cap_chart_build(rc.n);
    const EstimatorConfig cfg = estimator(rc);
    const std::string& x = rc.experiment;
    if (x == "solve-epsilon")
        return solve_epsilon(rc.n, rc.target_r);
    const Params par = Params::make(rc.n, rc.s, rc.p, rc.a);
    if (x == "derivative-check") {
        const PlaneFn g = make_plane_function(parse_function_spec(fspec), rc.n - 1, chart);
        const MultiIndex alpha = rc.alpha.empty() ? MultiIndex(rc.n) : parse_alpha(rc.alpha, rc.n);
        return derivative_check(g, rc.a, alpha, cfg, rc.p, rc.points, rc.h);
    }
    validate(cfg);
    if (x == "kernel-bound")
        return kernel_bound_scan(par, cfg, rc.pairs);
    if (x == "compute-j")
        return compute_J(par, cfg);
    if (x == "operator-sweep") {
        if (rc.family_size < 2)
            throw std::invalid_argument("family-size must be at least 2");
        const auto family = random_mix_family(rc.n, rc.family_size, rc.s >= 1.0, chart);
        return operator_sweep(par, family, cfg, rc.geometry == "cube" ? SweepGeometry::cube : SweepGeometry::ball);
    }
    const SphereFn f = make_sphere_function(parse_function_spec(fspec), rc.n, chart);
    if (x == "verify-lp-identity")
        return check_lp_identity(par, f, cfg);
    if (x == "verify-decomposition")
        return check_decomposition(par, f, cfg);
    if (x == "scaling-law") {
        const ScalingBranch b = rc.branch == "exact"         ? ScalingBranch::exact
                                : rc.branch == "statistical" ? ScalingBranch::statistical
                                                             : ScalingBranch::both;
        return scaling_law(par, f, rc.j, cfg, b);
    }
    if (x == "divergence")
        return divergence_probe(par, f, rc.jmax, cfg);
    throw std::invalid_argument("unknown experiment '" + x + "'");
}

std::string utc_timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

nlohmann::ordered_json metadata(const RunConfig& rc)
{
    return {{"artifact", "rsl"}, {"version", RSL_VERSION}, {"seed", rc.seed}, {"timestamp", utc_timestamp()}};
}

void write_atomic(const std::string& path, const std::string& content)
{
    const std::filesystem::path target(path);
    std::filesystem::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out << content;
        out.close();
        if (!out) {
            std::filesystem::remove(tmp);
            throw std::runtime_error("write failed for '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw std::runtime_error("cannot rename onto '" + path + "': " + ec.message());
    }
}

std::string one_line(std::string s)
{
    for (char& c : s)
        if (c == '\n' || c == '\r')
            c = ' ';
    return s;
}

} // namespace

int main(int argc, char** argv)
{
    RunConfig rc;
    if (const char* env = std::getenv("RSL_SEED")) {
        try {
            std::size_t used = 0;
            rc.seed = std::stoull(env, &used);
            if (used != std::string(env).size())
                throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            std::cerr << "rsl: error: RSL_SEED must be an unsigned integer, got '" << env << "'\n";
            return 3;
        }
    }

    CLI::App app{"Numerical lab for radial extension operators and W^{s,p} norm estimators.\n"
                 "Exit status: 0 pass, 1 fail, 2 inconclusive, 3 error."};
    app.set_version_flag("--version", RSL_VERSION);
    app.require_subcommand(1);
    std::vector<CLI::App*> subs;
    for (const Subcommand& sc : kSubcommands) {
        CLI::App* sub = app.add_subcommand(sc.name, std::string(sc.summary) + ".\n  Evaluates: " + sc.formula);
        const std::string name = sc.name;
        const bool estimator = name != "derivative-check" && name != "solve-epsilon";
        const bool function = name == "verify-lp-identity" || name == "verify-decomposition" ||
                              name == "scaling-law" || name == "divergence" || name == "derivative-check";
        add_common(*sub, rc, function, estimator);
        if (name == "kernel-bound")
            sub->add_option("--pairs", rc.pairs, "number of random pairs")->check(CLI::PositiveNumber);
        if (name == "scaling-law") {
            sub->add_option("--j", rc.j, "annulus index j >= 0")->check(CLI::NonNegativeNumber);
            sub->add_option("--mode", rc.branch, "exact | statistical | both")
                ->check(CLI::IsMember({"exact", "statistical", "both"}));
        }
        if (name == "divergence")
            sub->add_option("--jmax", rc.jmax, "largest annulus index")->check(CLI::PositiveNumber);
        if (name == "operator-sweep") {
            sub->add_option("--family-size", rc.family_size, "random_mix family members (seeds 1..K)");
            sub->add_option("--geometry", rc.geometry, "ball | cube")->check(CLI::IsMember({"ball", "cube"}));
        }
        if (name == "derivative-check") {
            sub->add_option("--alpha", rc.alpha, "multi-index, comma separated (default 0)");
            sub->add_option("--step", rc.h, "finite-difference step h")->check(CLI::PositiveNumber);
            sub->add_option("--points", rc.points, "cone points")->check(CLI::PositiveNumber);
        }
        if (name == "solve-epsilon")
            sub->add_option("--target-r", rc.target_r, "target chart radius")->check(CLI::Range(0.0, 1e300));
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "rsl: error: " << one_line(e.what()) << "\n";
        return 3;
    }

    try {
        CLI::App* chosen = nullptr;
        for (CLI::App* sub : subs)
            if (sub->parsed())
                chosen = sub;
        rc.experiment = chosen->get_name();
        if (!rc.config.empty())
            apply_config_file(*chosen, rc.config);

        const Report report = run(rc);
        std::string body;
        if (rc.format == "csv") {
            body = report.to_csv();
        } else {
            nlohmann::ordered_json doc;
            doc["report"] = report.to_json();
            doc["metadata"] = metadata(rc);
            body = doc.dump(2) + "\n";
        }
        if (rc.output.empty()) {
            std::cout << body;
        } else {
            write_atomic(rc.output, body);
            if (rc.format == "csv")
                write_atomic(rc.output + ".meta.json", metadata(rc).dump(2) + "\n");
            std::cout << rc.experiment << ": " << to_string(report.verdict)
                      << (report.classification.empty() ? "" : " (" + report.classification + ")") << " -> "
                      << rc.output << "\n";
        }
        return exit_code(report.verdict);
    } catch (const std::exception& e) {
        std::cerr << "rsl: error: " << one_line(e.what()) << "\n";
        return 3;
    }
}
