#ifndef SEPAINT_METRICS_HPP
#define SEPAINT_METRICS_HPP

#include <string>
#include <vector>

#include "sepaint/field.hpp"

namespace sepaint {

enum class EvalRegion { missing, full };

const char* eval_region_name(EvalRegion r);
EvalRegion eval_region_from_name(const std::string& name);

/// All percentages are x100 (75.0 means three quarters). A class with zero
/// union (absent from both maps in the region) has iou_valid false and is
/// excluded from the mIoU mean.
struct EvalReport {
    double accuracy = 0.0;
    double mean_iou = 0.0;
    std::vector<double> class_iou;     // x100, one per class; 0 when invalid
    std::vector<bool> iou_valid;       // class included in the mean?
    std::size_t evaluated_pixels = 0;
    EvalRegion region = EvalRegion::missing;
};

/// Pixel accuracy and per-class IoU over the selected region: missing =
/// pixels with M = 0, full = every pixel. Per class, one-vs-rest counts give
/// IoU = tp / (tp + fp + fn); accuracy is the fraction of evaluated pixels
/// where pred equals gt. Throws DomainError on shape mismatch, labels
/// outside [0, K), or an empty evaluated region.
EvalReport evaluate(const LabelMap& pred, const LabelMap& gt, const Mask& mask,
                    EvalRegion region, int num_classes);

}  // namespace sepaint

#endif
