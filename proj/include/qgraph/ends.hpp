#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qgraph/graph.hpp"

namespace qgraph {

/// Closed-form description of an infinite positive length sequence
/// l_0, l_1, l_2, ... These families keep every series classification exact:
/// no numerical divergence guessing is ever needed.
///
///   constant(a)        l_n = a
///   geometric(a, q)    l_n = a q^n
///   power(a, s)        l_n = a / (n+1)^s   (the n-th edge, counted from 1)
///   prefix-then-law    explicit first lengths, then a base law
class SequenceLaw {
public:
    enum class Kind { Constant, Geometric, Power, PrefixThenLaw };

    static SequenceLaw constant(double a) { return SequenceLaw(Kind::Constant, a, 0, 0); }
    static SequenceLaw geometric(double a, double q) {
        return SequenceLaw(Kind::Geometric, a, q, 0);
    }
    static SequenceLaw power(double a, double s) { return SequenceLaw(Kind::Power, a, 0, s); }
    static SequenceLaw prefix_then(std::vector<double> prefix, SequenceLaw tail) {
        if (tail.kind_ == Kind::PrefixThenLaw)
            throw std::invalid_argument("prefix law must continue with a base law");
        for (double x : prefix)
            if (!(x > 0.0)) throw std::invalid_argument("prefix lengths must be positive");
        SequenceLaw law(Kind::PrefixThenLaw, 0, 0, 0);
        law.prefix_ = std::move(prefix);
        law.tail_ = std::make_shared<SequenceLaw>(std::move(tail));
        return law;
    }

    [[nodiscard]] Kind kind() const { return kind_; }
    [[nodiscard]] double a() const { return a_; }
    [[nodiscard]] double q() const { return q_; }
    [[nodiscard]] double s() const { return s_; }
    [[nodiscard]] const std::vector<double>& prefix() const { return prefix_; }
    [[nodiscard]] const SequenceLaw& tail() const { return *tail_; }

    [[nodiscard]] double length(std::size_t n) const {
        switch (kind_) {
            case Kind::Constant: return a_;
            case Kind::Geometric: return a_ * std::pow(q_, static_cast<double>(n));
            case Kind::Power: return a_ * std::pow(static_cast<double>(n + 1), -s_);
            case Kind::PrefixThenLaw:
                return n < prefix_.size() ? prefix_[n] : tail_->length(n - prefix_.size());
        }
        return 0.0;
    }

    [[nodiscard]] double infimum() const {
        switch (kind_) {
            case Kind::Constant: return a_;
            case Kind::Geometric: return q_ < 1.0 ? 0.0 : a_;
            case Kind::Power: return 0.0;
            case Kind::PrefixThenLaw: {
                double m = tail_->infimum();
                for (double x : prefix_) m = std::min(m, x);
                return m;
            }
        }
        return 0.0;
    }

    /// Does sum l_n diverge? Constant always; geometric iff q >= 1; power iff
    /// s <= 1 (integral test).
    [[nodiscard]] bool sum_diverges() const {
        switch (kind_) {
            case Kind::Constant: return true;
            case Kind::Geometric: return q_ >= 1.0;
            case Kind::Power: return s_ <= 1.0;
            case Kind::PrefixThenLaw: return tail_->sum_diverges();
        }
        return true;
    }

    /// Exact value of sum l_n when it converges. Geometric sums in closed
    /// form; the power law uses Euler-Maclaurin with two correction terms,
    /// which leaves a relative error far below 1e-10.
    [[nodiscard]] double finite_sum() const {
        if (sum_diverges()) throw std::logic_error("series diverges; no finite sum");
        switch (kind_) {
            case Kind::Constant: break;
            case Kind::Geometric: return a_ / (1.0 - q_);
            case Kind::Power: return a_ * zeta(s_);
            case Kind::PrefixThenLaw: {
                double s = tail_->finite_sum();
                for (double x : prefix_) s += x;
                return s;
            }
        }
        throw std::logic_error("unreachable");
    }

    /// Does sum b^n l_n diverge (b >= 2)? Geometric converges iff b q < 1;
    /// constant and power always diverge since b^n dominates.
    [[nodiscard]] bool weighted_sum_diverges(int b) const {
        switch (kind_) {
            case Kind::Constant: return true;
            case Kind::Geometric: return b * q_ >= 1.0;
            case Kind::Power: return true;
            case Kind::PrefixThenLaw: return tail_->weighted_sum_diverges(b);
        }
        return true;
    }

    [[nodiscard]] double finite_weighted_sum(int b) const {
        if (weighted_sum_diverges(b))
            throw std::logic_error("weighted series diverges; no finite sum");
        switch (kind_) {
            case Kind::Geometric: return a_ / (1.0 - b * q_);
            case Kind::PrefixThenLaw: {
                double s = 0.0;
                double w = 1.0;
                for (double x : prefix_) {
                    s += w * x;
                    w *= b;
                }
                return s + w * tail_->finite_weighted_sum(b);
            }
            default: break;
        }
        throw std::logic_error("unreachable");
    }

    [[nodiscard]] double partial_sum(std::size_t terms) const {
        double s = 0.0;
        for (std::size_t n = 0; n < terms; ++n) s += length(n);
        return s;
    }
    [[nodiscard]] double partial_weighted_sum(std::size_t terms, int b) const {
        double s = 0.0;
        double w = 1.0;
        for (std::size_t n = 0; n < terms; ++n) {
            s += w * length(n);
            w *= b;
        }
        return s;
    }

    [[nodiscard]] bool parameters_valid() const {
        if (!(a_ > 0.0) && kind_ != Kind::PrefixThenLaw) return false;
        if (kind_ == Kind::Geometric && !(q_ > 0.0)) return false;
        if (kind_ == Kind::Power && !(s_ > 0.0)) return false;
        if (kind_ == Kind::PrefixThenLaw && !(tail_ && tail_->parameters_valid())) return false;
        return true;
    }

private:
    SequenceLaw(Kind kind, double a, double q, double s) : kind_(kind), a_(a), q_(q), s_(s) {}

    // zeta(s) = sum_{n<=N} n^-s + tail, with the Euler-Maclaurin tail
    // int_N^inf x^-s dx - N^-s/2 + s N^-s-1/12 + O(N^-s-3).
    static double zeta(double s) {
        const int N = 10000;
        double sum = 0.0;
        for (int n = N; n >= 1; --n) sum += std::pow(static_cast<double>(n), -s);
        const double Nd = N;
        return sum + std::pow(Nd, 1.0 - s) / (s - 1.0) - 0.5 * std::pow(Nd, -s) +
               s / 12.0 * std::pow(Nd, -s - 1.0);
    }

    Kind kind_;
    double a_, q_, s_;
    std::vector<double> prefix_;
    std::shared_ptr<SequenceLaw> tail_;
};

/// One parametric way to escape to infinity.
///
///   Ray:  attach ~ v_1 ~ v_2 ~ ... with edge n of length l_n; one end.
///   Tree: a single level-0 edge from the attach vertex to the tree root,
///         below which every vertex has b >= 2 children; b^n edges of length
///         l_n at level n, uncountably many ends.
struct EndGadget {
    enum class Kind { Ray, RegularTree };
    Kind kind = Kind::Ray;
    std::string attach;
    int branching = 0; // trees only
    SequenceLaw law = SequenceLaw::constant(1.0);
};

/// Infinite metric graph presented as a finite core plus end gadgets.
/// Local finiteness holds by construction (bounded branching everywhere).
struct EndedGraphDescription {
    MetricGraph core;
    std::vector<EndGadget> gadgets;
};

inline void validate_description(const EndedGraphDescription& d) {
    const ValidationReport core_report = validate(d.core, /*allow_edgeless=*/!d.gadgets.empty());
    if (!core_report.valid) {
        std::string msg = "invalid core graph:";
        for (const auto& v : core_report.violations) msg += " " + v;
        throw std::invalid_argument(msg);
    }
    for (const EndGadget& gd : d.gadgets) {
        (void)d.core.vertex_index(gd.attach); // throws on unknown vertex
        if (gd.kind == EndGadget::Kind::RegularTree && gd.branching < 2)
            throw std::invalid_argument("tree gadget needs branching >= 2");
        if (!gd.law.parameters_valid())
            throw std::invalid_argument("sequence law has nonpositive parameters");
    }
}

struct EndVolume {
    bool infinite = false;
    double value = 0.0; // meaningful when finite
};

/// Volume class of the ends contributed by one gadget. All tails of a
/// positive series share its convergence, so vol(U_n) = infinity for every
/// neighborhood U_n exactly when the full series diverges.
///   Ray:  sum l_n.
///   Tree: subtree volume from level n is sum_{m>n} b^{m-n} l_m, governed by
///         sum b^m l_m; the finite value reported is the whole gadget volume.
inline EndVolume end_volume(const EndGadget& g) {
    EndVolume v;
    if (g.kind == EndGadget::Kind::Ray) {
        v.infinite = g.law.sum_diverges();
        if (!v.infinite) v.value = g.law.finite_sum();
    } else {
        v.infinite = g.law.weighted_sum_diverges(g.branching);
        if (!v.infinite) v.value = g.law.finite_weighted_sum(g.branching);
    }
    return v;
}

struct VolumeValue {
    bool infinite = false;
    double value = 0.0;
};

/// Core volume plus gadget volumes (tree level n carries b^n edges).
inline VolumeValue total_volume(const EndedGraphDescription& d) {
    VolumeValue v;
    v.value = d.core.volume();
    for (const EndGadget& g : d.gadgets) {
        const EndVolume ev = end_volume(g);
        if (ev.infinite) {
            v.infinite = true;
            v.value = 0.0;
            return v;
        }
        v.value += ev.value;
    }
    return v;
}

struct EndCount {
    bool infinite = false;
    int count = 0;
};

/// Each ray contributes one end; any regular tree (b >= 2) contributes
/// uncountably many; the compact core contributes none.
inline EndCount count_ends(const EndedGraphDescription& d) {
    EndCount c;
    for (const EndGadget& g : d.gadgets) {
        if (g.kind == EndGadget::Kind::RegularTree) {
            c.infinite = true;
            return c;
        }
        ++c.count;
    }
    return c;
}

struct MarkovianVerdict {
    bool unique = false;
    std::vector<std::string> evidence; // one line per gadget
};

/// Markovian uniqueness holds if and only if all ends have infinite volume.
inline MarkovianVerdict markovian_uniqueness(const EndedGraphDescription& d) {
    MarkovianVerdict v;
    v.unique = true;
    for (std::size_t i = 0; i < d.gadgets.size(); ++i) {
        const EndVolume ev = end_volume(d.gadgets[i]);
        std::string line = "gadget " + std::to_string(i) + " (" +
                           (d.gadgets[i].kind == EndGadget::Kind::Ray ? "ray" : "tree") +
                           " at " + d.gadgets[i].attach + "): end volume ";
        if (ev.infinite) {
            line += "infinite";
        } else {
            line += std::to_string(ev.value) + " (finite)";
            v.unique = false;
        }
        v.evidence.push_back(std::move(line));
    }
    return v;
}

enum class SelfAdjointVerdict { Yes, No, Inconclusive };

struct SelfAdjointness {
    SelfAdjointVerdict verdict = SelfAdjointVerdict::Inconclusive;
    std::string criterion; // "i".."iv" when verdict == Yes
    std::string reason;
};

/// Sufficient criteria, strongest first:
///   (i)   the graph is finite (no gadgets);
///   (ii)  edge lengths bounded below, inf l(e) > 0;
///   (iii) (G, rho_0) complete: the length of every escape route diverges;
///   (iv)  (G, rho_m) complete, with the star metric along the level
///         sequence; within this gadget family the rho_m edge lengths are a
///         bounded positive combination of neighboring l_n, so (iv) holds
///         exactly when (iii) does.
/// When Markovian uniqueness fails, self-adjointness fails with it. None of
/// the criteria are necessary, so the remaining case is "inconclusive".
inline SelfAdjointness self_adjointness(const EndedGraphDescription& d) {
    SelfAdjointness r;
    if (d.gadgets.empty()) {
        r.verdict = SelfAdjointVerdict::Yes;
        r.criterion = "i";
        r.reason = "finite metric graph";
        return r;
    }

    bool inf_positive = true;
    for (const EndGadget& g : d.gadgets) inf_positive = inf_positive && g.law.infimum() > 0.0;
    if (inf_positive) {
        r.verdict = SelfAdjointVerdict::Yes;
        r.criterion = "ii";
        r.reason = "edge lengths bounded from below";
        return r;
    }

    bool rho0_complete = true;
    for (const EndGadget& g : d.gadgets) rho0_complete = rho0_complete && g.law.sum_diverges();
    if (rho0_complete) {
        r.verdict = SelfAdjointVerdict::Yes;
        r.criterion = "iii";
        r.reason = "complete in the natural path metric";
        return r;
    }

    // rho_m along a ray: l_m(e_n) = (l_{n-1} + l_n) + (l_n + l_{n+1});
    // along a tree level sequence: (l_{n-1} + b l_n) + (l_n + b l_{n+1}).
    // Either way the series diverges exactly when sum l_n does.
    bool rhom_complete = true;
    for (const EndGadget& g : d.gadgets) rhom_complete = rhom_complete && g.law.sum_diverges();
    if (rhom_complete) {
        r.verdict = SelfAdjointVerdict::Yes;
        r.criterion = "iv";
        r.reason = "complete in the star metric";
        return r;
    }

    if (!markovian_uniqueness(d).unique) {
        r.verdict = SelfAdjointVerdict::No;
        r.reason = "Markovian uniqueness fails (some end has finite volume)";
        return r;
    }
    r.verdict = SelfAdjointVerdict::Inconclusive;
    r.reason = "no sufficient criterion applies; the criteria are not necessary";
    return r;
}

struct GadgetSummary {
    std::string type; // "ray" or "tree"
    std::string attach;
    int branching = 0;
    EndVolume volume;
};

struct ClassificationReport {
    EndCount ends;
    std::vector<GadgetSummary> gadgets;
    MarkovianVerdict markovian;
    SelfAdjointness self_adjoint;
    VolumeValue volume;
};

inline ClassificationReport classify(const EndedGraphDescription& d) {
    validate_description(d);
    ClassificationReport rep;
    rep.ends = count_ends(d);
    for (const EndGadget& g : d.gadgets) {
        GadgetSummary s;
        s.type = g.kind == EndGadget::Kind::Ray ? "ray" : "tree";
        s.attach = g.attach;
        s.branching = g.kind == EndGadget::Kind::RegularTree ? g.branching : 0;
        s.volume = end_volume(g);
        rep.gadgets.push_back(std::move(s));
    }
    rep.markovian = markovian_uniqueness(d);
    rep.self_adjoint = self_adjointness(d);
    rep.volume = total_volume(d);

    // Consistency gates on the rule tables.
    bool all_infinite = true;
    for (const auto& g : rep.gadgets) all_infinite = all_infinite && g.volume.infinite;
    if (rep.markovian.unique != all_infinite)
        throw std::logic_error("Markovian verdict must match the end-volume criterion");
    if (rep.self_adjoint.verdict == SelfAdjointVerdict::Yes && !rep.markovian.unique)
        throw std::logic_error("self-adjointness must imply Markovian uniqueness");
    return rep;
}

} // namespace qgraph
