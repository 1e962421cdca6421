#include "lsfusion/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lsfusion/errors.hpp"

namespace lsfusion {

std::string MetricsReport::to_kv() const {
    std::ostringstream ss;
    ss.precision(12);
    ss << "abs_rel=" << abs_rel << " bad2=" << bad2 << " bad3=" << bad3 << " bad5=" << bad5
       << " delta_125=" << delta_125 << " density=" << density << " evaluated=" << evaluated;
    return ss.str();
}

std::string MetricsReport::csv_header() {
    return "abs_rel,bad2,bad3,bad5,delta_125,density,evaluated";
}

std::string MetricsReport::csv_row() const {
    std::ostringstream ss;
    ss.precision(12);
    ss << abs_rel << "," << bad2 << "," << bad3 << "," << bad5 << "," << delta_125 << ","
       << density << "," << evaluated;
    return ss.str();
}

namespace {

MetricsReport metrics_impl(const Grid<double>& pred_values, const Grid<uint8_t>* pred_mask,
                           const SparseDisparityMap& gt, const CalibrationSet& calib,
                           bool abs_rel_on_disparity) {
    if (!pred_values.same_shape(gt.values))
        throw DataError("compute_metrics: prediction and ground truth dimensions differ");
    const int h = gt.height(), w = gt.width();
    const double bf = calib.baseline * calib.focal;

    size_t n = 0;
    size_t bad2 = 0, bad3 = 0, bad5 = 0, delta_ok = 0;
    double abs_rel_sum = 0.0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!gt.mask.at(y, x)) continue;
            if (pred_mask && !pred_mask->at(y, x)) continue;
            const double d_gt = gt.values.at(y, x);
            const double d_pred = pred_values.at(y, x);
            const double err = std::abs(d_pred - d_gt);
            if (err > 2.0) ++bad2;
            if (err > 3.0) ++bad3;
            if (err > 5.0) ++bad5;

            const double d_clamped = std::max(d_pred, kMetricMinDisparity);
            const double z_pred = bf / d_clamped;
            const double z_gt = bf / d_gt;
            if (abs_rel_on_disparity)
                abs_rel_sum += std::abs(d_pred - d_gt) / d_gt;
            else
                abs_rel_sum += std::abs(z_pred - z_gt) / z_gt;
            if (std::max(z_pred / z_gt, z_gt / z_pred) < 1.25) ++delta_ok;
            ++n;
        }
    if (n == 0) throw DataError("compute_metrics: ground truth has no valid pixel");

    MetricsReport report;
    report.evaluated = n;
    report.bad2 = static_cast<double>(bad2) / n;
    report.bad3 = static_cast<double>(bad3) / n;
    report.bad5 = static_cast<double>(bad5) / n;
    report.delta_125 = static_cast<double>(delta_ok) / n;
    report.abs_rel = abs_rel_sum / n;
    return report;
}

}  // namespace

MetricsReport compute_metrics(const DenseDisparityField& pred, const SparseDisparityMap& gt,
                              const CalibrationSet& calib, bool abs_rel_on_disparity) {
    MetricsReport report = metrics_impl(pred.values, nullptr, gt, calib, abs_rel_on_disparity);
    report.density = 1.0;
    return report;
}

MetricsReport compute_metrics_sparse(const SparseDisparityMap& pred, const SparseDisparityMap& gt,
                                     const CalibrationSet& calib, bool abs_rel_on_disparity) {
    MetricsReport report =
        metrics_impl(pred.values, &pred.mask, gt, calib, abs_rel_on_disparity);
    report.density = static_cast<double>(pred.valid_count()) / pred.values.size();
    return report;
}

}  // namespace lsfusion
