#ifndef SRQ_METRICS_HPP
#define SRQ_METRICS_HPP

#include "srq/tensor.hpp"

#include <string>
#include <vector>

namespace srq {

struct PerImageMetrics {
    std::string pair_id;
    double rrmse = 0.0;
    double ms_mssim = 0.0;
    double qilv = 0.0;
};

struct MetricReport {
    std::vector<PerImageMetrics> per_image;
    double rrmse = 0.0;     // arithmetic means over per_image
    double ms_mssim = 0.0;
    double qilv = 0.0;

    std::string to_csv() const;
    std::string to_json() const;
};

// Frobenius norm of (sr - hr) divided by the Frobenius norm of hr.
double rrmse(const Tensor& sr, const Tensor& hr);

// Mean windowed SSIM per dyadic scale, averaged arithmetically over the
// scales. Downscaling between scales is a 2-tap box low-pass + 2x decimation.
double ms_mssim(const Tensor& sr, const Tensor& hr, int scales = 5);

// Local-variance quality index over the luminance channel: compares global
// mean, spread, and correlation of the 5x5 local-variance maps.
double qilv(const Tensor& sr, const Tensor& hr);

MetricReport evaluate_pairs(
    const std::vector<std::pair<std::string, std::pair<Tensor, Tensor>>>& pairs);

}  // namespace srq

#endif
