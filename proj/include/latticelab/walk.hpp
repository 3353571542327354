// walk.hpp -- step distributions, walk specifications and their second moments.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "latticelab/errors.hpp"
#include "latticelab/rational.hpp"
#include "latticelab/vec2.hpp"

namespace latticelab {

// One-step increment kernel p(.) on Z^2 with finite support. Weights are kept
// as doubles plus, when every weight was given exactly, as rationals; the
// exact form backs the bit-exact small-instance oracles, the double form
// backs Monte Carlo and large-horizon kernels.
class StepDistribution {
  public:
    struct Atom {
        Vec2 site;
        double weight = 0.0;
        Rational exact;
    };

    // General factory: weights >= 0, sum to 1 (exactly in rational mode,
    // within 1e-15 otherwise); duplicate sites are merged, zero weights dropped.
    static StepDistribution make(std::vector<Atom> atoms, bool exact) {
        if (atoms.empty()) throw Error("step distribution needs a non-empty support");
        std::map<Vec2, Atom> merged;
        for (const auto& a : atoms) {
            if (a.weight < 0.0 || (exact && a.exact.is_negative())) throw Error("negative step weight");
            auto [it, fresh] = merged.try_emplace(a.site, a);
            if (!fresh) {
                it->second.weight += a.weight;
                if (exact) it->second.exact = it->second.exact + a.exact;
            }
        }
        StepDistribution d;
        d.exact_ = exact;
        for (auto& [site, a] : merged) {
            if (exact) a.weight = a.exact.value();
            if (a.weight > 0.0) d.atoms_.push_back(a);
        }
        if (d.atoms_.empty()) throw Error("step distribution has zero total mass");
        if (exact) {
            Rational sum;
            for (const auto& a : d.atoms_) sum = sum + a.exact;
            if (sum != Rational(1)) throw Error("exact step weights must sum to 1");
        } else {
            double sum = 0.0;
            for (const auto& a : d.atoms_) sum += a.weight;
            if (std::abs(sum - 1.0) > 1e-15 * d.atoms_.size()) throw Error("step weights must sum to 1");
        }
        return d;
    }

    static StepDistribution make_zero_mean(std::vector<Atom> atoms, bool exact) {
        StepDistribution d = make(std::move(atoms), exact);
        const auto [mx, my] = d.mean();
        if (std::abs(mx) > 1e-12 || std::abs(my) > 1e-12) throw Error("zero-mean step distribution has nonzero mean");
        return d;
    }

    const std::vector<Atom>& atoms() const { return atoms_; }
    bool exact() const { return exact_; }
    std::size_t size() const { return atoms_.size(); }

    double weight_at(Vec2 v) const {
        for (const auto& a : atoms_)
            if (a.site == v) return a.weight;
        return 0.0;
    }

    Rational exact_weight_at(Vec2 v) const {
        for (const auto& a : atoms_)
            if (a.site == v) return a.exact;
        return Rational(0);
    }

    std::pair<double, double> mean() const {
        double mx = 0.0, my = 0.0;
        for (const auto& a : atoms_) {
            mx += a.weight * static_cast<double>(a.site.x);
            my += a.weight * static_cast<double>(a.site.y);
        }
        return {mx, my};
    }

    // Largest sup-norm reach of a single step.
    std::int64_t max_reach() const {
        std::int64_t r = 0;
        for (const auto& a : atoms_) r = std::max(r, a.site.norm_inf());
        return r;
    }

    std::int64_t max_reach_l1() const {
        std::int64_t r = 0;
        for (const auto& a : atoms_) r = std::max(r, a.site.norm1());
        return r;
    }

    // Kernel of the reversed walk, p~(x) = p(-x).
    StepDistribution reflected() const {
        std::vector<Atom> out;
        out.reserve(atoms_.size());
        for (const auto& a : atoms_) out.push_back({-a.site, a.weight, a.exact});
        return make(std::move(out), exact_);
    }

  private:
    std::vector<Atom> atoms_; // sorted by site, deterministic iteration order
    bool exact_ = false;
};

enum class TimeKind { discrete, continuous };

// A walk = step kernel + time kind. Continuous walks carry a jump rate; the
// discrete rate is implicitly 1.
struct WalkSpec {
    StepDistribution step;
    TimeKind kind = TimeKind::discrete;
    double rate = 1.0;

    static WalkSpec make_discrete(StepDistribution s) { return {std::move(s), TimeKind::discrete, 1.0}; }
    static WalkSpec make_continuous(StepDistribution s, double rate) {
        if (!(rate > 0.0)) throw Error("continuous walk needs rate > 0");
        return {std::move(s), TimeKind::continuous, rate};
    }

    bool discrete() const { return kind == TimeKind::discrete; }
};

// Symmetric 2x2 second-moment matrix Q of a step kernel, stored as 3 scalars.
struct CovarianceMatrix {
    double q11 = 0.0;
    double q12 = 0.0;
    double q22 = 0.0;

    double det() const { return q11 * q22 - q12 * q12; }
    double min_eigenvalue() const {
        const double tr = q11 + q22;
        const double disc = std::sqrt(std::max(0.0, (q11 - q22) * (q11 - q22) + 4.0 * q12 * q12));
        return 0.5 * (tr - disc);
    }
    // x . Q^-1 x; throws when Q is singular.
    double inverse_quadratic(double x, double y) const {
        const double d = det();
        if (!(d > 0.0)) throw DegenerateCovariance();
        return (q22 * x * x - 2.0 * q12 * x * y + q11 * y * y) / d;
    }
};

// Q_ij = sum_x p(x) x_i x_j.
inline CovarianceMatrix covariance(const StepDistribution& dist) {
    CovarianceMatrix q;
    for (const auto& a : dist.atoms()) {
        const double x = static_cast<double>(a.site.x), y = static_cast<double>(a.site.y);
        q.q11 += a.weight * x * x;
        q.q12 += a.weight * x * y;
        q.q22 += a.weight * y * y;
    }
    return q;
}

// Z = X - Y. Discrete: both walks jump once per tick, so the step of Z is the
// step of X convolved with the reflected step of Y. Continuous: Z jumps at
// rate kx+ky and picks an X step or a reflected Y step in proportion.
inline WalkSpec difference_walk(const WalkSpec& x, const WalkSpec& y) {
    if (x.kind != y.kind) throw MixedTimeKinds();
    const StepDistribution ry = y.step.reflected();
    const bool exact = x.step.exact() && y.step.exact();
    std::vector<StepDistribution::Atom> atoms;
    if (x.discrete()) {
        atoms.reserve(x.step.size() * ry.size());
        for (const auto& a : x.step.atoms())
            for (const auto& b : ry.atoms())
                atoms.push_back({a.site + b.site, a.weight * b.weight,
                                 exact ? a.exact * b.exact : Rational(0)});
        return WalkSpec::make_discrete(StepDistribution::make(std::move(atoms), exact));
    }
    const double total = x.rate + y.rate;
    const double wx = x.rate / total, wy = y.rate / total;
    for (const auto& a : x.step.atoms()) atoms.push_back({a.site, wx * a.weight, Rational(0)});
    for (const auto& b : ry.atoms()) atoms.push_back({b.site, wy * b.weight, Rational(0)});
    return WalkSpec::make_continuous(StepDistribution::make(std::move(atoms), false), total);
}

// ---------------------------------------------------------------------------
// Presets and JSON loading
// ---------------------------------------------------------------------------

inline StepDistribution preset_step(const std::string& name) {
    using A = StepDistribution::Atom;
    if (name == "srw")
        return StepDistribution::make_zero_mean(
            {A{{1, 0}, 0.0, Rational(1, 4)}, A{{-1, 0}, 0.0, Rational(1, 4)},
             A{{0, 1}, 0.0, Rational(1, 4)}, A{{0, -1}, 0.0, Rational(1, 4)}},
            true);
    if (name == "lazy-srw")
        return StepDistribution::make_zero_mean(
            {A{{0, 0}, 0.0, Rational(1, 2)},
             A{{1, 0}, 0.0, Rational(1, 8)}, A{{-1, 0}, 0.0, Rational(1, 8)},
             A{{0, 1}, 0.0, Rational(1, 8)}, A{{0, -1}, 0.0, Rational(1, 8)}},
            true);
    if (name == "diag")
        return StepDistribution::make_zero_mean(
            {A{{1, 1}, 0.0, Rational(1, 4)}, A{{1, -1}, 0.0, Rational(1, 4)},
             A{{-1, 1}, 0.0, Rational(1, 4)}, A{{-1, -1}, 0.0, Rational(1, 4)}},
            true);
    throw Error("unknown step preset: " + name);
}

inline std::vector<std::string> preset_names() { return {"srw", "lazy-srw", "diag"}; }

// Document shape: {"support": [[dx,dy,"num/den" | float], ...],
//                  "kind": "discrete" | {"continuous": rate}}
// A plain string is accepted as a preset name (discrete by default), and an
// object may carry "preset" instead of "support".
inline WalkSpec walk_spec_from_json(const nlohmann::json& j) {
    if (j.is_string()) return WalkSpec::make_discrete(preset_step(j.get<std::string>()));
    if (!j.is_object()) throw Error("walk spec must be a preset name or an object");

    StepDistribution step = [&] {
        if (j.contains("preset")) return preset_step(j.at("preset").get<std::string>());
        if (!j.contains("support")) throw Error("walk spec needs \"support\" or \"preset\"");
        std::vector<StepDistribution::Atom> atoms;
        bool exact = true;
        for (const auto& entry : j.at("support")) {
            if (!entry.is_array() || entry.size() != 3) throw Error("support entries are [dx,dy,weight]");
            StepDistribution::Atom a;
            a.site = {entry[0].get<std::int64_t>(), entry[1].get<std::int64_t>()};
            if (entry[2].is_string()) {
                a.exact = Rational::parse(entry[2].get<std::string>());
                a.weight = a.exact.value();
            } else {
                a.weight = entry[2].get<double>();
                exact = false;
            }
            atoms.push_back(a);
        }
        if (!exact)
            for (auto& a : atoms) a.exact = Rational(0);
        return StepDistribution::make_zero_mean(std::move(atoms), exact);
    }();

    if (!j.contains("kind")) return WalkSpec::make_discrete(std::move(step));
    const auto& kind = j.at("kind");
    if (kind.is_string()) {
        if (kind.get<std::string>() != "discrete") throw Error("kind must be \"discrete\" or {\"continuous\": rate}");
        return WalkSpec::make_discrete(std::move(step));
    }
    if (kind.is_object() && kind.contains("continuous"))
        return WalkSpec::make_continuous(std::move(step), kind.at("continuous").get<double>());
    throw Error("kind must be \"discrete\" or {\"continuous\": rate}");
}

} // namespace latticelab
