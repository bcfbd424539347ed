#include "srq/metrics.hpp"

#include "srq/kernels.hpp"
#include "srq/ssim.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace srq {

namespace {

constexpr double kQilvStab = 1e-10;

// mean windowed SSIM over all overlapping 5x5 windows and all channels
double mean_ssim(const Tensor& a, const Tensor& b) {
    const int h = a.dim(0), w = a.dim(1), c = a.dim(2);
    double windows = static_cast<double>(h - kSsimWindow + 1) * (w - kSsimWindow + 1) * c;
    return sssim(a, b) / windows;
}

struct MapStats {
    double mean, sd, cov;  // cov is against the other map
};

}  // namespace

double rrmse(const Tensor& sr, const Tensor& hr) {
    check_same_shape(sr, hr, "rrmse");
    double num = 0.0, den = 0.0;
    for (std::int64_t i = 0; i < sr.numel(); ++i) {
        double d = sr[i] - hr[i];
        num += d * d;
        den += hr[i] * hr[i];
    }
    if (den == 0.0) throw std::invalid_argument("rrmse: degenerate reference");
    return std::sqrt(num) / std::sqrt(den);
}

double ms_mssim(const Tensor& sr, const Tensor& hr, int scales) {
    check_same_shape(sr, hr, "ms_mssim");
    if (scales < 1) throw std::invalid_argument("ms_mssim: scales must be >= 1");
    int min_dim = kSsimWindow << (scales - 1);
    if (sr.dim(0) < min_dim || sr.dim(1) < min_dim)
        throw std::invalid_argument("ms_mssim: image too small for requested scales");
    Tensor a = sr, b = hr;
    double total = 0.0;
    for (int s = 0; s < scales; ++s) {
        total += mean_ssim(a, b);
        if (s + 1 < scales) {
            a = kernels::box_downsample_2x(a);
            b = kernels::box_downsample_2x(b);
        }
    }
    return total / scales;
}

double qilv(const Tensor& sr, const Tensor& hr) {
    check_same_shape(sr, hr, "qilv");
    Tensor vs = kernels::local_variance_map(kernels::luminance(sr), kSsimWindow);
    Tensor vh = kernels::local_variance_map(kernels::luminance(hr), kSsimWindow);

    const double n = static_cast<double>(vs.numel());
    double mean_s = 0.0, mean_h = 0.0;
    for (std::int64_t i = 0; i < vs.numel(); ++i) {
        mean_s += vs[i];
        mean_h += vh[i];
    }
    mean_s /= n;
    mean_h /= n;
    double var_s = 0.0, var_h = 0.0, cov = 0.0;
    for (std::int64_t i = 0; i < vs.numel(); ++i) {
        double ds = vs[i] - mean_s, dh = vh[i] - mean_h;
        var_s += ds * ds;
        var_h += dh * dh;
        cov += ds * dh;
    }
    var_s /= n;
    var_h /= n;
    cov /= n;
    double sd_s = std::sqrt(var_s), sd_h = std::sqrt(var_h);

    if (sd_s == 0.0 && sd_h == 0.0) {
        if (vs.flat() == vh.flat()) return 1.0;
        throw std::invalid_argument("qilv: degenerate variance structure");
    }
    double f1 = (2.0 * mean_s * mean_h + kQilvStab) / (mean_s * mean_s + mean_h * mean_h + kQilvStab);
    double f2 = (2.0 * sd_s * sd_h + kQilvStab) / (var_s + var_h + kQilvStab);
    double f3 = (cov + kQilvStab) / (sd_s * sd_h + kQilvStab);
    return f1 * f2 * f3;
}

MetricReport evaluate_pairs(
    const std::vector<std::pair<std::string, std::pair<Tensor, Tensor>>>& pairs) {
    if (pairs.empty()) throw std::invalid_argument("evaluate_pairs: empty pair list");
    MetricReport report;
    for (const auto& [id, pair] : pairs) {
        const auto& [sr, hr] = pair;
        PerImageMetrics m;
        m.pair_id = id;
        m.rrmse = rrmse(sr, hr);
        m.ms_mssim = ms_mssim(sr, hr, sr.dim(0) >= 80 ? 5 : 1);
        m.qilv = qilv(sr, hr);
        report.per_image.push_back(m);
        report.rrmse += m.rrmse;
        report.ms_mssim += m.ms_mssim;
        report.qilv += m.qilv;
    }
    double n = static_cast<double>(report.per_image.size());
    report.rrmse /= n;
    report.ms_mssim /= n;
    report.qilv /= n;
    return report;
}

std::string MetricReport::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "pair_id,rrmse,ms_mssim,qilv\n";
    for (const auto& m : per_image)
        os << m.pair_id << "," << m.rrmse << "," << m.ms_mssim << "," << m.qilv << "\n";
    return os.str();
}

std::string MetricReport::to_json() const {
    std::ostringstream os;
    os.precision(17);
    os << "{\n  \"count\": " << per_image.size() << ",\n  \"mean\": {\"rrmse\": " << rrmse
       << ", \"ms_mssim\": " << ms_mssim << ", \"qilv\": " << qilv << "}\n}\n";
    return os.str();
}

}  // namespace srq
