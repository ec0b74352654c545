#include "gmed/stats.hpp"

#include <limits>

namespace gmed {

namespace {

// Continued fraction for the incomplete beta (Lentz's method).
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 1e-12;
    constexpr double kTiny = 1e-300;

    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

// Lower regularized incomplete gamma P(a, x): series for x < a+1,
// continued fraction otherwise.
double gamma_p(double a, double x) {
    if (x < 0 || a <= 0) throw std::invalid_argument("gamma_p domain");
    if (x == 0) return 0.0;
    const double lg = std::lgamma(a);
    if (x < a + 1.0) {
        double ap = a, sum = 1.0 / a, del = sum;
        for (int n = 0; n < 500; ++n) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::fabs(del) < std::fabs(sum) * 1e-14) break;
        }
        return sum * std::exp(-x + a * std::log(x) - lg);
    }
    double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -double(i) * (double(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::fabs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-14) break;
    }
    return 1.0 - std::exp(-x + a * std::log(x) - lg) * h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (x < 0.0 || x > 1.0) throw std::invalid_argument("incomplete_beta: x out of [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log(1.0 - x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_sf(double t, double df) {
    if (df <= 0) throw std::invalid_argument("student_t_sf: df must be positive");
    const double x = df / (df + t * t);
    const double half_tail = 0.5 * incomplete_beta(df / 2.0, 0.5, x);
    return t >= 0 ? half_tail : 1.0 - half_tail;
}

double chi_squared_sf(double x, double df) {
    if (x <= 0) return 1.0;
    return 1.0 - gamma_p(df / 2.0, x / 2.0);
}

double paired_t_test_one_sided(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("paired samples differ in length");
    const std::size_t n = a.size();
    if (n < 2) throw std::invalid_argument("paired t-test needs n >= 2");
    std::vector<double> diff(n);
    for (std::size_t i = 0; i < n; ++i) diff[i] = a[i] - b[i];
    const auto ms = mean_std(diff);
    if (ms.std == 0.0) {
        if (ms.mean > 0.0) return 0.0;
        if (ms.mean < 0.0) return 1.0;
        return 0.5;
    }
    const double t = ms.mean / (ms.std / std::sqrt(double(n)));
    return student_t_sf(t, double(n - 1));
}

MeanStd mean_std(const std::vector<double>& v) {
    MeanStd out;
    if (v.empty()) return out;
    double sum = 0;
    for (double x : v) sum += x;
    out.mean = sum / double(v.size());
    if (v.size() < 2) return out;
    double sq = 0;
    for (double x : v) sq += (x - out.mean) * (x - out.mean);
    out.std = std::sqrt(sq / double(v.size() - 1));
    return out;
}

}  // namespace gmed
