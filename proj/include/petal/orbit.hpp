#pragma once

#include <ostream>
#include <thread>

#include "petal/polymap.hpp"
#include "petal/stable.hpp"

namespace petal {

enum class OrbitStatus { ConvergedToOrigin, Escaped, Undecided };

inline const char* to_string(OrbitStatus s) {
    switch (s) {
        case OrbitStatus::ConvergedToOrigin: return "converged";
        case OrbitStatus::Escaped: return "escaped";
        case OrbitStatus::Undecided: return "undecided";
    }
    return "?";
}

struct OrbitOptions {
    long max_iter = 100000;
    double escape_radius = 1.0;
    double conv_radius = 1e-8;
    int conv_window = 50;
    int max_samples = 2048;             // stored subsamples of the trajectory
    std::vector<long> checkpoints;      // iterate indices recorded exactly
    int kp = 0;                         // k+p for the Leau-Fatou column (0 = skip)
    int r = 0;                          // exponent of the tangency column
    UniJet gamma2{0};                   // curve jet for the asymptoticity column
    int asym_N = 0;                     // order of the asymptoticity column
};

struct OrbitSample {
    long j;
    Complex x, y;
    Complex leau_fatou;  // (k+p) j x_j^{k+p}
    double tangency;     // Im(x_j) / Re(x_j)^{r+1}
    double asym;         // |y_j - J_N gamma2(x_j)| / |x_j|^{N+1}
};

struct OrbitRecord {
    CPoint start{0.0, 0.0};
    OrbitStatus status = OrbitStatus::Undecided;
    long iterations = 0;
    long stop_index = -1;  // index at which escape/convergence was detected
    std::vector<OrbitSample> samples;
    double max_y_over_x = 0.0;  // sup |y_j| / |x_j| over the orbit
};

/// Iterate an exact polynomial map, recording a subsampled trajectory with
/// per-sample diagnostics. Convergence requires the final window of iterates
/// inside the convergence radius; leaving the escape radius stops the orbit.
inline OrbitRecord simulate_orbit(const PolyMap& map, CPoint p0, const OrbitOptions& opts = {}) {
    OrbitRecord rec;
    rec.start = p0;
    const long stride = std::max<long>(1, opts.max_iter / std::max(1, opts.max_samples - 64));
    const UniJet jet = opts.gamma2.truncated(opts.asym_N);
    auto record = [&](long j, CPoint p) {
        OrbitSample s;
        s.j = j;
        s.x = p.x;
        s.y = p.y;
        if (opts.kp > 0)
            s.leau_fatou = double(opts.kp) * double(j) * std::pow(p.x, opts.kp);
        if (p.x.real() != 0.0)
            s.tangency = p.x.imag() / std::pow(p.x.real(), opts.r + 1);
        else
            s.tangency = p.x.imag() == 0.0 ? 0.0 : INFINITY;
        const double dev = std::abs(p.y - jet.evaluate(p.x));
        s.asym = std::abs(p.x) > 0.0 ? dev / std::pow(std::abs(p.x), opts.asym_N + 1)
                                     : (dev == 0.0 ? 0.0 : INFINITY);
        rec.samples.push_back(s);
    };

    CPoint p = p0;
    int inside_window = 0;
    size_t next_checkpoint = 0;
    std::vector<long> cps = opts.checkpoints;
    std::sort(cps.begin(), cps.end());
    for (long j = 0; j <= opts.max_iter; ++j) {
        const double ax = std::abs(p.x), ay = std::abs(p.y);
        if (ax > 0.0) rec.max_y_over_x = std::max(rec.max_y_over_x, ay / ax);
        const bool cp = next_checkpoint < cps.size() && cps[next_checkpoint] == j;
        if (cp) ++next_checkpoint;
        if (j % stride == 0 || cp) record(j, p);
        rec.iterations = j;
        if (std::max(ax, ay) > opts.escape_radius) {
            rec.status = OrbitStatus::Escaped;
            rec.stop_index = j;
            if (j % stride != 0 && !cp) record(j, p);
            return rec;
        }
        inside_window = std::hypot(ax, ay) < opts.conv_radius ? inside_window + 1 : 0;
        if (inside_window >= opts.conv_window) {
            rec.status = OrbitStatus::ConvergedToOrigin;
            rec.stop_index = j;
            if (j % stride != 0 && !cp) record(j, p);
            return rec;
        }
        if (j < opts.max_iter) p = map.evaluate(p);
    }
    if (rec.samples.empty() || rec.samples.back().j != opts.max_iter) record(opts.max_iter, p);
    rec.status = OrbitStatus::Undecided;
    return rec;
}

/// Run many orbits in parallel over immutable inputs; results keep seed order.
inline std::vector<OrbitRecord> simulate_many(const PolyMap& map, const std::vector<CPoint>& seeds,
                                              const OrbitOptions& opts = {}) {
    std::vector<OrbitRecord> out(seeds.size());
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const size_t chunk = (seeds.size() + hw - 1) / std::max<size_t>(1, hw);
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < hw; ++t) {
        const size_t lo = t * chunk, hi = std::min(seeds.size(), lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] {
            for (size_t i = lo; i < hi; ++i) out[i] = simulate_orbit(map, seeds[i], opts);
        });
    }
    for (auto& th : pool) th.join();
    return out;
}

struct AsymptoticityVerdict {
    int N;
    bool pass;
    double c_fitted;         // max of |y - J_N gamma2(x)| / |x|^{N+1} over the tail
    double last_quartile;    // max over the last quartile of the tail
    double mid_quartile;     // max over the middle two quartiles
};

/// Finite surrogate of the asymptotic-expansion criterion: for each N the
/// normalized deviations |y_j - J_N gamma2(x_j)| / |x_j|^{N+1} over the tail
/// must stay bounded (last-quartile max <= 10 x mid-quartile max).
inline std::vector<AsymptoticityVerdict> asymptoticity_test(const OrbitRecord& orbit,
                                                            const UniJet& gamma2, int n_max,
                                                            double ratio_cap = 10.0) {
    std::vector<const OrbitSample*> tail;
    const long j0 = orbit.samples.empty() ? 0 : orbit.samples.back().j / 4;
    for (const auto& s : orbit.samples)
        if (s.j >= j0 && std::abs(s.x) > 0.0) tail.push_back(&s);
    if (tail.size() < 16) throw TailTooShort();
    std::vector<AsymptoticityVerdict> out;
    for (int N = 0; N <= n_max; ++N) {
        const UniJet jet = gamma2.truncated(N);
        std::vector<double> v;
        v.reserve(tail.size());
        for (const auto* s : tail)
            v.push_back(std::abs(s->y - jet.evaluate(s->x)) / std::pow(std::abs(s->x), N + 1));
        const size_t q = v.size() / 4;
        double mid = 0.0, last = 0.0, all = 0.0;
        for (size_t i = 0; i < v.size(); ++i) {
            all = std::max(all, v[i]);
            if (i >= q && i < 3 * q) mid = std::max(mid, v[i]);
            if (i >= 3 * q) last = std::max(last, v[i]);
        }
        AsymptoticityVerdict verdict;
        verdict.N = N;
        verdict.c_fitted = all;
        verdict.last_quartile = last;
        verdict.mid_quartile = mid;
        verdict.pass = std::isfinite(all) && last <= ratio_cap * std::max(mid, 1e-300);
        out.push_back(verdict);
    }
    return out;
}

struct CaptureEntry {
    size_t orbit;
    OrbitStatus status = OrbitStatus::Undecided;
    int direction_estimate = -1;  // nearest attracting direction of the x-tail
    double tangency_tail = 0.0;   // Im(x)/Re(x)^{r+1} at the tail, rotated frame
    int assigned_set = -1;        // index into the descriptor list, -1 = unassigned
    long entry_index = -1;        // first sampled index from which the orbit stays inside
    bool trivial = false;         // the orbit starts at the origin
};

/// Assign converging orbits to stable sets: the tangent attracting direction is
/// estimated from the argument of the reduced x-tail, and the entry index is
/// the first sampled iterate from which every later sample lies in the set.
inline std::vector<CaptureEntry> capture_report(const std::vector<OrbitRecord>& orbits,
                                                const std::vector<StableSetDescriptor>& sets,
                                                const ReducedPair& rp, double capture_tol = 1e-8) {
    std::vector<CaptureEntry> out;
    const int n_dirs = rp.k + rp.p;
    for (size_t oi = 0; oi < orbits.size(); ++oi) {
        const OrbitRecord& orb = orbits[oi];
        CaptureEntry ce;
        ce.orbit = oi;
        ce.status = orb.status;
        if (std::abs(orb.start.x) == 0.0 && std::abs(orb.start.y) == 0.0) {
            ce.trivial = true;
            out.push_back(ce);
            continue;
        }
        if (orb.status != OrbitStatus::Escaped) {
            // direction estimate from the argument of the reduced x-tail
            Complex dir_acc = 0.0;
            size_t n_tail = 0;
            const long jtail = orb.samples.back().j / 2;
            for (const auto& s : orb.samples) {
                if (s.j < jtail) continue;
                const CPoint red = rp.log.pull_point({s.x, s.y});
                if (std::abs(red.x) == 0.0) continue;
                dir_acc += red.x / std::abs(red.x);
                ++n_tail;
            }
            if (n_tail > 0) {
                const double ang = std::arg(dir_acc);
                int best = 0;
                double bestd = INFINITY;
                for (int l = 0; l < n_dirs; ++l) {
                    double d = std::abs(std::remainder(
                        ang - 2.0 * std::numbers::pi * double(l) / double(n_dirs),
                        2.0 * std::numbers::pi));
                    if (d < bestd) {
                        bestd = d;
                        best = l;
                    }
                }
                ce.direction_estimate = best;
            }
        }
        for (size_t si = 0; si < sets.size() && ce.assigned_set < 0; ++si) {
            const auto& sd = sets[si];
            long entry = -1;
            bool inside_from_entry = false;
            for (const auto& s : orb.samples) {
                CPoint red = sd.log.pull_point({s.x, s.y});
                const bool in = std::abs(red.x) > 0.0 &&
                                sd.contains_rotated(red.x, red.y, capture_tol);
                if (in && entry < 0) {
                    entry = s.j;
                    inside_from_entry = true;
                } else if (!in && entry >= 0) {
                    entry = -1;
                    inside_from_entry = false;
                }
            }
            if (inside_from_entry && entry >= 0) {
                ce.assigned_set = int(si);
                ce.entry_index = entry;
                // tangency consistency in the rotated frame of the capturing set
                const auto& back = orb.samples.back();
                const CPoint red = sd.log.pull_point({back.x, back.y});
                if (red.x.real() > 0.0)
                    ce.tangency_tail =
                        red.x.imag() / std::pow(red.x.real(), sd.region.r + 1);
            }
        }
        out.push_back(ce);
    }
    return out;
}

/// CSV dump of an orbit record (one row per stored sample).
inline void write_orbit_csv(std::ostream& os, const OrbitRecord& rec) {
    os << "j,re_x,im_x,re_y,im_y,re_leau_fatou,im_leau_fatou,tangency,asym\n";
    os.precision(17);
    for (const auto& s : rec.samples)
        os << s.j << ',' << s.x.real() << ',' << s.x.imag() << ',' << s.y.real() << ','
           << s.y.imag() << ',' << s.leau_fatou.real() << ',' << s.leau_fatou.imag() << ','
           << s.tangency << ',' << s.asym << '\n';
}

} // namespace petal
