#pragma once

#include <string>

#include "lsfusion/types.hpp"

namespace lsfusion {

// Disparity floor applied to predictions before depth conversion.
inline constexpr double kMetricMinDisparity = 0.1;

struct MetricsReport {
    double abs_rel = 0;
    double bad2 = 0, bad3 = 0, bad5 = 0;
    double delta_125 = 0;
    double density = 0;
    size_t evaluated = 0;

    std::string to_kv() const;
    std::string csv_row() const;
    static std::string csv_header();
};

// Over gt-valid pixels: bad-k is the fraction with |pred - gt| > k px on
// disparities; abs_rel and delta<1.25 are computed on depths via B*f/d with
// the prediction clamped below at 0.1 px. Throws DataError when gt has no
// valid pixel. abs_rel_on_disparity switches abs_rel to disparity space.
MetricsReport compute_metrics(const DenseDisparityField& pred, const SparseDisparityMap& gt,
                              const CalibrationSet& calib, bool abs_rel_on_disparity = false);

// Sparse predictions (e.g. raw Lidar) evaluate over jointly-valid pixels and
// report the prediction's own density.
MetricsReport compute_metrics_sparse(const SparseDisparityMap& pred, const SparseDisparityMap& gt,
                                     const CalibrationSet& calib,
                                     bool abs_rel_on_disparity = false);

}  // namespace lsfusion
