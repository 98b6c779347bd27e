#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "wtb/csv.hpp"
#include "wtb/error.hpp"
#include "wtb/instance.hpp"
#include "wtb/rng.hpp"

// Lap-time pipeline: CSV ingestion, per-race normalization and pit-stop
// filtering, the per-driver fit of beta*exp(-k*alpha) - |gamma|*k, and the
// two-driver WTB instance built from a pair of fits.
namespace wtb::f1 {

struct LapRecord {
    long driver_id = 0;
    long race_id = 0;
    long lap_index = 1;
    double lap_time_sec = 0.0;
    bool pit_stop = false;
    bool operator==(const LapRecord&) const = default;
};

inline constexpr const char* kLapHeader = "driver_id,race_id,lap_index,lap_time_sec,pit_stop";

inline std::vector<LapRecord> parse_lap_csv(std::istream& in) {
    static const char* const cols[] = {"driver_id", "race_id", "lap_index", "lap_time_sec", "pit_stop"};
    std::vector<LapRecord> out;
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view view(line);
        if (lineno == 1 && view.substr(0, 3) == "\xEF\xBB\xBF") view.remove_prefix(3);
        if (csv::trim(view).empty()) continue;
        if (!header_seen) {
            if (csv::trim(view) != kLapHeader) {
                throw ParseError("line " + std::to_string(lineno) + ": expected header '" + kLapHeader + "'");
            }
            header_seen = true;
            continue;
        }
        const auto f = csv::split(view);
        auto fail = [&](std::size_t col, const std::string& what) {
            throw ParseError("line " + std::to_string(lineno) + ", column " + cols[col] + ": " + what);
        };
        if (f.size() != 5) {
            throw ParseError("line " + std::to_string(lineno) + ": expected 5 fields, got " +
                             std::to_string(f.size()));
        }
        LapRecord r;
        if (!csv::parse(f[0], r.driver_id)) fail(0, "not an integer");
        if (!csv::parse(f[1], r.race_id)) fail(1, "not an integer");
        if (!csv::parse(f[2], r.lap_index)) fail(2, "not an integer");
        if (r.lap_index < 1) fail(2, "lap index must be >= 1");
        if (!csv::parse(f[3], r.lap_time_sec) || !std::isfinite(r.lap_time_sec)) fail(3, "not a number");
        if (!(r.lap_time_sec > 0.0)) fail(3, "lap time must be positive");
        if (f[4] == "1" || f[4] == "true") {
            r.pit_stop = true;
        } else if (f[4] == "0" || f[4] == "false") {
            r.pit_stop = false;
        } else {
            fail(4, "expected 0, 1, true or false");
        }
        out.push_back(r);
    }
    return out;
}

inline std::vector<LapRecord> parse_lap_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    return parse_lap_csv(in);
}

inline void write_lap_csv(std::ostream& out, const std::vector<LapRecord>& laps) {
    out << kLapHeader << '\n';
    for (const auto& r : laps) {
        out << r.driver_id << ',' << r.race_id << ',' << r.lap_index << ',' << csv::format(r.lap_time_sec) << ','
            << (r.pit_stop ? 1 : 0) << '\n';
    }
}

struct DriverSeries {
    long driver_id = 0;
    std::vector<double> values;  // normalized lap k at index k-1
};

struct RaceSeries {
    long race_id = 0;
    double min_time = 0.0;
    double max_time = 0.0;
    std::vector<DriverSeries> drivers;  // ascending driver id
};

inline constexpr std::size_t kMinPrePitLaps = 8;

// Min-max normalizes every lap time in the race (all drivers, all laps,
// including pit laps), keeps each driver's run of consecutive laps 1, 2, ...
// before the first pit lap, drops drivers with fewer than 8 such laps, and
// truncates the survivors to the shortest survivor.
inline RaceSeries normalize_and_filter(const std::vector<LapRecord>& records, long race_id) {
    std::map<long, std::map<long, const LapRecord*>> by_driver;
    RaceSeries race;
    race.race_id = race_id;
    race.min_time = std::numeric_limits<double>::infinity();
    race.max_time = -std::numeric_limits<double>::infinity();
    for (const auto& r : records) {
        if (r.race_id != race_id) continue;
        if (!by_driver[r.driver_id].emplace(r.lap_index, &r).second) {
            throw ParameterError("race " + std::to_string(race_id) + ": driver " + std::to_string(r.driver_id) +
                                 " has lap " + std::to_string(r.lap_index) + " twice");
        }
        race.min_time = std::min(race.min_time, r.lap_time_sec);
        race.max_time = std::max(race.max_time, r.lap_time_sec);
    }
    if (by_driver.empty()) throw ParameterError("race " + std::to_string(race_id) + " has no laps");
    const double span = race.max_time - race.min_time;
    if (!(span > 0.0)) {
        throw ParameterError("race " + std::to_string(race_id) + ": all lap times equal, cannot normalize");
    }
    std::size_t shortest = std::numeric_limits<std::size_t>::max();
    for (const auto& [driver, laps] : by_driver) {
        DriverSeries s;
        s.driver_id = driver;
        long expect = 1;
        for (const auto& [k, rec] : laps) {
            if (k != expect || rec->pit_stop) break;
            s.values.push_back((rec->lap_time_sec - race.min_time) / span);
            ++expect;
        }
        if (s.values.size() < kMinPrePitLaps) continue;
        shortest = std::min(shortest, s.values.size());
        race.drivers.push_back(std::move(s));
    }
    for (auto& s : race.drivers) s.values.resize(shortest);
    return race;
}

inline std::vector<long> race_ids(const std::vector<LapRecord>& records) {
    std::vector<long> ids;
    for (const auto& r : records) ids.push_back(r.race_id);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

struct LapModelFit {
    long driver_id = 0;
    long race_id = 0;
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;  // enters the model as |gamma|
    double sigma = 0.0;
    double terminal_mean = 0.0;
    std::size_t num_laps = 0;
    double ssr = 0.0;

    double mean_at(double k) const { return beta * std::exp(-k * alpha) - std::abs(gamma) * k; }

    // Soft sanity bound on normalized data.
    bool means_in_range(double lo = -0.5, double hi = 1.5) const {
        for (std::size_t k = 1; k <= num_laps; ++k) {
            const double v = mean_at(static_cast<double>(k));
            if (!(v >= lo && v <= hi)) return false;
        }
        return true;
    }

    bool operator==(const LapModelFit&) const = default;
};

class FitError : public Error {
public:
    FitError(const std::string& what, LapModelFit best) : Error(what), best_(best) {}
    const LapModelFit& best_so_far() const noexcept { return best_; }

private:
    LapModelFit best_;
};

inline constexpr double kSigmaFloor = 1e-4;
inline constexpr int kFitIterations = 200;

namespace detail {

struct LapResidual {
    using Scalar = double;
    enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
    using InputType = Eigen::VectorXd;
    using ValueType = Eigen::VectorXd;
    using JacobianType = Eigen::MatrixXd;

    const std::vector<double>* y = nullptr;

    int inputs() const { return 3; }
    int values() const { return static_cast<int>(y->size()); }

    int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& f) const {
        for (std::size_t i = 0; i < y->size(); ++i) {
            const double k = static_cast<double>(i + 1);
            double r = p[1] * std::exp(-k * p[0]) - std::abs(p[2]) * k - (*y)[i];
            // exp overflow on wild trial steps: report a huge residual so the step is rejected.
            if (!std::isfinite(r)) r = 1e150;
            f[static_cast<Eigen::Index>(i)] = r;
        }
        return 0;
    }
};

inline double ssr_of(const std::vector<double>& y, double a, double b, double g) {
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double k = static_cast<double>(i + 1);
        const double r = b * std::exp(-k * a) - std::abs(g) * k - y[i];
        s += r * r;
    }
    return std::isfinite(s) ? s : std::numeric_limits<double>::infinity();
}

}  // namespace detail

// Least-squares fit of the mean curve by Levenberg-Marquardt (Eigen's MINPACK
// port, central-difference Jacobian) from a 16-point start grid. The lowest
// residual over converged starts wins; earlier starts win ties.
inline LapModelFit fit_lap_model(const std::vector<double>& series, long driver_id = 0, long race_id = 0) {
    const std::size_t n = series.size();
    if (n < kMinPrePitLaps) throw ParameterError("lap series needs at least 8 points");
    for (double v : series) {
        if (!std::isfinite(v)) throw ParameterError("lap series contains a non-finite value");
    }
    const double data_max = *std::max_element(series.begin(), series.end());
    // Least-squares slope over the last half, as a magnitude.
    double last_half_slope = 0.0;
    {
        const std::size_t start = n / 2;
        const double cnt = static_cast<double>(n - start);
        double sk = 0.0, sy = 0.0;
        for (std::size_t i = start; i < n; ++i) {
            sk += static_cast<double>(i + 1);
            sy += series[i];
        }
        const double mk = sk / cnt, my = sy / cnt;
        double num = 0.0, den = 0.0;
        for (std::size_t i = start; i < n; ++i) {
            const double dk = static_cast<double>(i + 1) - mk;
            num += dk * (series[i] - my);
            den += dk * dk;
        }
        if (den > 0.0) last_half_slope = std::abs(num / den);
    }

    const double alphas[] = {0.1, 0.5, 1.0, 2.0};
    const double betas[] = {data_max, 2.0 * data_max};
    const double gammas[] = {0.0, last_half_slope};

    detail::LapResidual functor;
    functor.y = &series;

    bool any_converged = false;
    double best_ssr = std::numeric_limits<double>::infinity();
    Eigen::Vector3d best_p(alphas[0], betas[0], gammas[0]);
    bool best_converged = false;
    for (double a0 : alphas) {
        for (double b0 : betas) {
            for (double g0 : gammas) {
                Eigen::NumericalDiff<detail::LapResidual, Eigen::Central> diff(functor, 1e-12);
                Eigen::LevenbergMarquardt<decltype(diff)> lm(diff);
                lm.parameters.ftol = 1e-10;
                lm.parameters.xtol = 1e-12;
                lm.parameters.maxfev = 1000000;
                Eigen::VectorXd p(3);
                p << a0, b0, g0;
                auto status = lm.minimizeInit(p);
                bool converged = false;
                if (status != Eigen::LevenbergMarquardtSpace::ImproperInputParameters) {
                    for (int it = 0; it < kFitIterations; ++it) {
                        status = lm.minimizeOneStep(p);
                        if (status != Eigen::LevenbergMarquardtSpace::Running) break;
                    }
                    using namespace Eigen::LevenbergMarquardtSpace;
                    converged = status == RelativeReductionTooSmall || status == RelativeErrorTooSmall ||
                                status == RelativeErrorAndReductionTooSmall || status == CosinusTooSmall ||
                                status == FtolTooSmall || status == XtolTooSmall || status == GtolTooSmall;
                }
                const double s = detail::ssr_of(series, p[0], p[1], p[2]);
                // Converged starts always beat unconverged ones.
                const bool better = (converged && !best_converged) ||
                                    (converged == best_converged && s < best_ssr);
                if (better) {
                    best_ssr = s;
                    best_p = Eigen::Vector3d(p[0], p[1], p[2]);
                    best_converged = converged;
                }
                any_converged = any_converged || converged;
            }
        }
    }

    LapModelFit fit;
    fit.driver_id = driver_id;
    fit.race_id = race_id;
    fit.alpha = best_p[0];
    fit.beta = best_p[1];
    fit.gamma = best_p[2];
    fit.num_laps = n;
    fit.ssr = best_ssr;
    fit.terminal_mean = fit.mean_at(static_cast<double>(n));
    {
        std::vector<double> res(n);
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            res[i] = series[i] - fit.mean_at(static_cast<double>(i + 1));
            mean += res[i];
        }
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (double r : res) var += (r - mean) * (r - mean);
        var /= static_cast<double>(n - 1);
        fit.sigma = std::max(kSigmaFloor, std::sqrt(var));
    }
    if (!any_converged) {
        throw FitError("lap model fit did not converge from any start within " +
                           std::to_string(kFitIterations) + " iterations",
                       fit);
    }
    return fit;
}

// Both one-sided interval tests, half-width sigma^2 as in the source criterion.
inline bool eligible_pair(const LapModelFit& a, const LapModelFit& b) {
    const double gap = std::abs(a.terminal_mean - b.terminal_mean);
    return gap <= b.sigma * b.sigma && gap <= a.sigma * a.sigma;
}

inline std::vector<std::pair<long, long>> eligible_pairs(const std::vector<LapModelFit>& fits) {
    if (fits.size() < 2) throw ParameterError("eligible_pairs needs at least two fits");
    std::vector<std::pair<long, long>> out;
    for (std::size_t i = 0; i < fits.size(); ++i) {
        for (std::size_t j = i + 1; j < fits.size(); ++j) {
            if (eligible_pair(fits[i], fits[j])) out.emplace_back(fits[i].driver_id, fits[j].driver_id);
        }
    }
    return out;
}

// True when some fitted mean at k = 1..m falls outside [0,1] and is clamped.
inline bool means_clamped(const LapModelFit& fit, std::size_t m) {
    for (std::size_t k = 1; k <= m; ++k) {
        const double v = fit.mean_at(static_cast<double>(k));
        if (v < 0.0 || v > 1.0) return true;
    }
    return false;
}

// K = 2 drivers, all-ones weights over a window of m laps. Playing driver x
// with in-window count y costs N(mean_x(y), sigma_x^2) clipped to [0,1], the
// mean itself clipped to [0,1] first.
inline WtbInstance make_f1_instance(const LapModelFit& a, const LapModelFit& b, std::size_t m) {
    if (m == 0) throw ParameterError("m must be positive");
    std::vector<LossFunction> h;
    for (const LapModelFit* fit : {&a, &b}) {
        if (m > fit->num_laps) {
            throw ParameterError("m = " + std::to_string(m) + " exceeds the " + std::to_string(fit->num_laps) +
                                 " fitted laps of driver " + std::to_string(fit->driver_id));
        }
        std::vector<TableEntry> table;
        double prev = std::numeric_limits<double>::infinity();
        for (std::size_t k = 1; k <= m; ++k) {
            const double v = fit->mean_at(static_cast<double>(k));
            if (!(v < prev)) {
                throw ParameterError("fitted mean of driver " + std::to_string(fit->driver_id) +
                                     " is not strictly decreasing at lap " + std::to_string(k));
            }
            prev = v;
            table.push_back({static_cast<double>(k), std::clamp(v, 0.0, 1.0)});
        }
        h.push_back(LossFunction::from_table(std::move(table)));
    }
    WtbInstance inst(m, std::vector<std::vector<double>>(2, std::vector<double>(m, 1.0)), std::move(h),
                     FeedbackLaw::clamped_gaussian({a.sigma, b.sigma}));
    inst.set_name("f1 race " + std::to_string(a.race_id) + " drivers " + std::to_string(a.driver_id) + "," +
                  std::to_string(b.driver_id));
    return inst;
}

// Noisy draws of the mean curve at k = 1..num_laps. Values are not clipped.
inline std::vector<double> generate_series(double alpha, double beta, double gamma, double sigma,
                                           std::size_t num_laps, Rng& rng) {
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> out(num_laps);
    for (std::size_t i = 0; i < num_laps; ++i) {
        const double k = static_cast<double>(i + 1);
        out[i] = beta * std::exp(-k * alpha) - std::abs(gamma) * k;
        if (sigma > 0.0) out[i] += sigma * noise(rng);
    }
    return out;
}

struct SyntheticLapOptions {
    std::size_t races = 3;
    std::size_t drivers = 6;
    std::size_t laps = 20;
    double base_time_sec = 88.0;
    double spread_sec = 6.0;
};

// Synthetic race data in the lap CSV schema: each driver follows the lap
// model in normalized units, mapped to seconds, and pits once somewhere in
// laps 5..laps.
inline std::vector<LapRecord> generate_synthetic_laps(const SyntheticLapOptions& opt, Rng& rng) {
    if (opt.laps < 2 || opt.drivers < 1) throw ParameterError("need at least 2 laps and 1 driver");
    std::vector<LapRecord> out;
    std::normal_distribution<double> noise(0.0, 1.0);
    for (std::size_t race = 1; race <= opt.races; ++race) {
        for (std::size_t d = 1; d <= opt.drivers; ++d) {
            const double alpha = 0.3 + 0.9 * uniform01(rng);
            const double beta = 0.4 + 0.4 * uniform01(rng);
            const double gamma = 0.015 * uniform01(rng);
            const double sigma = 0.01 + 0.03 * uniform01(rng);
            const double offset = 0.1 + 0.3 * uniform01(rng);
            const std::size_t pit = 5 + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(opt.laps - 4));
            for (std::size_t k = 1; k <= opt.laps; ++k) {
                const double kd = static_cast<double>(k);
                double norm = offset + beta * std::exp(-kd * alpha) - gamma * kd + sigma * noise(rng);
                if (k == pit) norm += 0.6;  // pit lane time
                LapRecord r;
                r.driver_id = static_cast<long>(d);
                r.race_id = static_cast<long>(race);
                r.lap_index = static_cast<long>(k);
                r.lap_time_sec = opt.base_time_sec + opt.spread_sec * std::max(norm, 0.0);
                r.pit_stop = k == pit;
                out.push_back(r);
            }
        }
    }
    return out;
}

inline void write_fits_csv(std::ostream& out, const std::vector<LapModelFit>& fits) {
    out << "driver_id,race_id,alpha,beta,gamma,sigma,terminal_mean,num_laps\n";
    for (const auto& f : fits) {
        out << f.driver_id << ',' << f.race_id << ',' << csv::format(f.alpha) << ',' << csv::format(f.beta) << ','
            << csv::format(f.gamma) << ',' << csv::format(f.sigma) << ',' << csv::format(f.terminal_mean) << ','
            << f.num_laps << '\n';
    }
}

struct RacePairs {
    long race_id = 0;
    std::vector<std::pair<long, long>> pairs;
};

inline void write_pairs_csv(std::ostream& out, const std::vector<RacePairs>& races) {
    out << "race_id,driver_a,driver_b\n";
    for (const auto& r : races) {
        for (const auto& [a, b] : r.pairs) out << r.race_id << ',' << a << ',' << b << '\n';
    }
}

struct RaceFits {
    RaceSeries series;
    std::vector<LapModelFit> fits;
    std::vector<std::pair<long, long>> pairs;
};

// Normalize, filter, fit every surviving driver and list eligible pairs, for
// every race in the records. Races with fewer than two surviving drivers get
// fits but no pairs.
inline std::vector<RaceFits> fit_races(const std::vector<LapRecord>& records) {
    std::vector<RaceFits> out;
    for (long race : race_ids(records)) {
        RaceFits rf;
        rf.series = normalize_and_filter(records, race);
        for (const auto& d : rf.series.drivers) rf.fits.push_back(fit_lap_model(d.values, d.driver_id, race));
        if (rf.fits.size() >= 2) rf.pairs = eligible_pairs(rf.fits);
        out.push_back(std::move(rf));
    }
    return out;
}

}  // namespace wtb::f1
