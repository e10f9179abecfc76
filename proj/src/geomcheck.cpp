#include "affina/geomcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "affina/common.hpp"
#include "affina/mathutil.hpp"

namespace affina {

namespace {

constexpr double kMinPairDistance = 1e-6;  // px; guards the log singularity
constexpr double kMergeMinExpected = 5.0;
constexpr int kPowerMaxIters = 200;
constexpr double kPowerTol = 1e-10;
constexpr double kLowConfidenceFloor = 6.0;

int quantize_bin(double z, int K, double lo, double hi) {
    const int b = static_cast<int>((z - lo) / (hi - lo) * K);
    return b < 0 ? 0 : (b >= K ? K - 1 : b);
}

}  // namespace

LdrMatrix compute_ldr(const std::vector<Vec2>& X, const std::vector<Vec2>& Y) {
    if (X.size() != Y.size()) throw DomainError("coordinate lists differ in length");
    const int n = static_cast<int>(X.size());
    if (n < 5) throw DomainError("too few matches for DISTRAT (need >= 5)");
    for (const Vec2& p : X)
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw DomainError("non-finite coordinates");
    for (const Vec2& p : Y)
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw DomainError("non-finite coordinates");

    LdrMatrix m;
    m.n = n;
    m.z.assign(static_cast<size_t>(n) * n, 0.0f);
    m.valid.assign(static_cast<size_t>(n) * n, 0);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 16)
#endif
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double dx = (X[i] - X[j]).norm();
            const double dy = (Y[i] - Y[j]).norm();
            if (dx < kMinPairDistance || dy < kMinPairDistance) continue;
            const float z = static_cast<float>(std::log(dx / dy));
            m.z[static_cast<size_t>(i) * n + j] = z;
            m.z[static_cast<size_t>(j) * n + i] = z;
            m.valid[static_cast<size_t>(i) * n + j] = 1;
            m.valid[static_cast<size_t>(j) * n + i] = 1;
        }
    }
    return m;
}

std::vector<double> histogram_values(const std::vector<double>& values, int K,
                                     double z_lo, double z_hi) {
    if (K < 5) throw DomainError("histogram needs K >= 5");
    std::vector<double> h(K, 0.0);
    for (double z : values) h[quantize_bin(z, K, z_lo, z_hi)] += 1.0;
    return h;
}

std::vector<double> ldr_histogram(const LdrMatrix& ldrs, int K, double z_lo,
                                  double z_hi) {
    if (K < 5) throw DomainError("histogram needs K >= 5");
    std::vector<double> h(K, 0.0);
    for (int i = 0; i < ldrs.n; ++i)
        for (int j = i + 1; j < ldrs.n; ++j)
            if (ldrs.ok(i, j)) h[quantize_bin(ldrs.at(i, j), K, z_lo, z_hi)] += 1.0;
    return h;
}

std::vector<double> outlier_pdf(int K, double z_lo, double z_hi) {
    if (K < 5) throw DomainError("outlier pdf needs K >= 5");
    std::vector<double> f(K);
    const double w = (z_hi - z_lo) / K;
    for (int k = 0; k < K; ++k) {
        const double a = z_lo + k * w;
        const double b = z_lo + (k + 1) * w;
        f[k] = 0.5 * (std::tanh(b) - std::tanh(a));
    }
    return f;
}

double estimate_beta(const std::vector<double>& h, const std::vector<double>& f) {
    if (h.size() != f.size()) throw DomainError("histogram/model size mismatch");
    double hf = 0.0, ff = 0.0;
    for (size_t k = 0; k < h.size(); ++k) {
        hf += h[k] * f[k];
        ff += f[k] * f[k];
    }
    if (ff <= 0.0) throw DomainError("degenerate outlier model");
    return hf / ff;
}

LdrModel make_ldr_model(const LdrMatrix& ldrs, int K, double z_lo, double z_hi) {
    LdrModel m;
    m.K = K;
    m.z_lo = z_lo;
    m.z_hi = z_hi;
    m.f = outlier_pdf(K, z_lo, z_hi);
    m.h = ldr_histogram(ldrs, K, z_lo, z_hi);
    m.beta = estimate_beta(m.h, m.f);
    m.d.resize(K);
    for (int k = 0; k < K; ++k) m.d[k] = m.h[k] - m.beta * m.f[k];
    return m;
}

GofStats goodness_of_fit_test(const std::vector<double>& h,
                              const std::vector<double>& f, double alpha) {
    const double n = std::accumulate(h.begin(), h.end(), 0.0);
    if (n < 25.0) throw DomainError("chi-square test needs at least 25 samples");
    const double fsum = std::accumulate(f.begin(), f.end(), 0.0);
    if (fsum <= 0.0) throw DomainError("degenerate outlier model");

    std::vector<double> hb(h), eb(f.size());
    for (size_t k = 0; k < f.size(); ++k) eb[k] = n * f[k] / fsum;

    // merge low-expectation bins inward from both ends
    auto merge_pass = [&](bool from_left) {
        std::vector<double> h2, e2;
        double hc = 0.0, ec = 0.0;
        const int K = static_cast<int>(hb.size());
        for (int idx = 0; idx < K; ++idx) {
            const int k = from_left ? idx : K - 1 - idx;
            hc += hb[k];
            ec += eb[k];
            if (ec >= kMergeMinExpected || idx == K - 1) {
                h2.push_back(hc);
                e2.push_back(ec);
                hc = ec = 0.0;
            }
        }
        if (!from_left) {
            std::reverse(h2.begin(), h2.end());
            std::reverse(e2.begin(), e2.end());
        }
        hb = std::move(h2);
        eb = std::move(e2);
    };
    merge_pass(true);
    merge_pass(false);
    // a trailing underfull group can remain; fold it into its neighbor
    while (eb.size() > 1 && (eb.front() < kMergeMinExpected || eb.back() < kMergeMinExpected)) {
        if (eb.front() < kMergeMinExpected) {
            eb[1] += eb[0];
            hb[1] += hb[0];
            eb.erase(eb.begin());
            hb.erase(hb.begin());
        } else {
            eb[eb.size() - 2] += eb.back();
            hb[hb.size() - 2] += hb.back();
            eb.pop_back();
            hb.pop_back();
        }
    }

    GofStats s;
    for (size_t k = 0; k < hb.size(); ++k) {
        const double diff = hb[k] - eb[k];
        s.chi2 += diff * diff / eb[k];
    }
    s.dof = std::max(static_cast<int>(hb.size()) - 1, 1);
    s.critical = chi2_quantile(1.0 - alpha, s.dof);
    s.result = s.chi2 <= s.critical ? GofResult::RejectPair : GofResult::Pass;
    return s;
}

InlierResult extract_inliers(const LdrMatrix& ldrs, const LdrModel& model) {
    const int n = ldrs.n;
    const double dmax = *std::max_element(model.d.begin(), model.d.end());
    if (dmax <= 0.0) throw DomainError("no inlier structure (max d <= 0)");

    // D_ij = d(q(z_ij)); invalid pairs and the diagonal stay zero
    std::vector<float> D(static_cast<size_t>(n) * n, 0.0f);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j || !ldrs.ok(i, j)) continue;
            const int q = quantize_bin(ldrs.at(i, j), model.K, model.z_lo, model.z_hi);
            D[static_cast<size_t>(i) * n + j] = static_cast<float>(model.d[q]);
        }

    std::vector<double> r(n, 1.0), next(n, 0.0);
    double mu = 0.0;
    {
        const double nn = 1.0 / std::sqrt(static_cast<double>(n));
        for (double& v : r) v *= nn;
    }
    for (int it = 0; it < kPowerMaxIters; ++it) {
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            const float* row = D.data() + static_cast<size_t>(i) * n;
            for (int j = 0; j < n; ++j) acc += row[j] * r[j];
            next[i] = acc;
        }
        double nrm = 0.0;
        for (double v : next) nrm += v * v;
        nrm = std::sqrt(nrm);
        if (nrm < 1e-300) throw DomainError("power iteration collapsed");
        for (double& v : next) v /= nrm;
        double mu_new = 0.0;
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            const float* row = D.data() + static_cast<size_t>(i) * n;
            for (int j = 0; j < n; ++j) acc += row[j] * next[j];
            mu_new += next[i] * acc;
        }
        r.swap(next);
        const bool converged = std::abs(mu_new - mu) <= kPowerTol * std::max(1.0, std::abs(mu_new));
        mu = mu_new;
        if (converged && it > 0) break;
    }

    // sign so the largest-magnitude entry is positive
    int arg = 0;
    for (int i = 1; i < n; ++i)
        if (std::abs(r[i]) > std::abs(r[arg])) arg = i;
    if (r[arg] < 0.0)
        for (double& v : r) v = -v;

    InlierResult out;
    out.eigenvalue = mu;
    out.eigenvector = r;
    out.m_hat = 1.0 + mu / dmax;
    const int m = std::clamp(static_cast<int>(std::floor(out.m_hat + 0.5)), 1, n);
    out.low_confidence = out.m_hat < kLowConfidenceFloor;

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (r[a] != r[b]) return r[a] > r[b];
        return a < b;
    });
    out.inlier_indices.assign(order.begin(), order.begin() + m);
    std::sort(out.inlier_indices.begin(), out.inlier_indices.end());
    return out;
}

VerifyResult distrat_verify(const std::vector<Vec2>& X, const std::vector<Vec2>& Y,
                            const VerifyConfig& cfg) {
    VerifyResult res;
    res.n = static_cast<int>(X.size());

    // normalize to zero mean, unit RMS radius (outlier model assumes it)
    auto normalize = [](std::vector<Vec2> pts) {
        Vec2 c{0.0, 0.0};
        for (const Vec2& p : pts) c = c + p;
        c = c * (1.0 / pts.size());
        double ms = 0.0;
        for (const Vec2& p : pts) ms += (p - c).dot(p - c);
        double s = std::sqrt(ms / pts.size());
        if (s < 1e-12) s = 1.0;
        for (Vec2& p : pts) p = (p - c) * (1.0 / s);
        return pts;
    };
    const std::vector<Vec2> Xn = normalize(X);
    const std::vector<Vec2> Yn = normalize(Y);

    const LdrMatrix ldrs = compute_ldr(Xn, Yn);
    const LdrModel model = make_ldr_model(ldrs, cfg.K, -cfg.z_range, cfg.z_range);
    res.beta = model.beta;

    // decorrelated test histogram: cyclic pairs (i, i+1 mod N) give nearly
    // independent LDR samples, keeping the chi-square calibration honest
    // (the all-pairs histogram is badly over-dispersed)
    std::vector<double> test_vals;
    test_vals.reserve(ldrs.n);
    for (int i = 0; i < ldrs.n; ++i) {
        const int j = (i + 1) % ldrs.n;
        if (ldrs.ok(i, j)) test_vals.push_back(ldrs.at(i, j));
    }
    if (test_vals.size() < 25) {
        res.pass = false;  // not enough evidence to claim structure
        return res;
    }
    const std::vector<double> h_test =
        histogram_values(test_vals, cfg.K, -cfg.z_range, cfg.z_range);
    const GofStats gof = goodness_of_fit_test(h_test, model.f, cfg.alpha);
    res.chi2 = gof.chi2;
    if (gof.result == GofResult::RejectPair) {
        res.pass = false;
        return res;
    }

    try {
        InlierResult inl = extract_inliers(ldrs, model);
        res.pass = true;
        res.m_hat = inl.m_hat;
        res.low_confidence = inl.low_confidence;
        res.inlier_indices = std::move(inl.inlier_indices);
    } catch (const DomainError&) {
        res.pass = false;  // gate passed but no eigen-structure
    }
    return res;
}

}  // namespace affina
