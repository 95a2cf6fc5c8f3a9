#include "sepaint/metrics.hpp"

#include <string>

#include "sepaint/errors.hpp"

namespace sepaint {

const char* eval_region_name(EvalRegion r) {
    return r == EvalRegion::missing ? "missing" : "full";
}

EvalRegion eval_region_from_name(const std::string& name) {
    if (name == "missing") return EvalRegion::missing;
    if (name == "full") return EvalRegion::full;
    throw ConfigError("unknown eval region '" + name + "' (expected missing or full)");
}

EvalReport evaluate(const LabelMap& pred, const LabelMap& gt, const Mask& mask,
                    EvalRegion region, int num_classes) {
    if (pred.height != gt.height || pred.width != gt.width || pred.height != mask.height ||
        pred.width != mask.width)
        throw DomainError("evaluate: shape mismatch");
    if (num_classes < 1) throw DomainError("evaluate: num_classes must be >= 1");

    std::vector<std::size_t> tp(num_classes, 0), fp(num_classes, 0), fn(num_classes, 0);
    std::size_t agree = 0, total = 0;
    for (std::size_t p = 0; p < pred.labels.size(); ++p) {
        if (region == EvalRegion::missing && mask.known[p]) continue;
        const std::int32_t a = pred.labels[p], b = gt.labels[p];
        if (a < 0 || a >= num_classes || b < 0 || b >= num_classes)
            throw DomainError("evaluate: label outside [0, " + std::to_string(num_classes) +
                              ") at pixel " + std::to_string(p));
        ++total;
        if (a == b) {
            ++agree;
            ++tp[a];
        } else {
            ++fp[a];
            ++fn[b];
        }
    }
    if (total == 0) throw DomainError("evaluate: evaluated region is empty");

    EvalReport rep;
    rep.region = region;
    rep.evaluated_pixels = total;
    rep.accuracy = 100.0 * static_cast<double>(agree) / static_cast<double>(total);
    rep.class_iou.assign(num_classes, 0.0);
    rep.iou_valid.assign(num_classes, false);
    double iou_sum = 0.0;
    int iou_n = 0;
    for (int k = 0; k < num_classes; ++k) {
        const std::size_t uni = tp[k] + fp[k] + fn[k];
        if (uni == 0) continue;  // class absent from both maps in the region
        rep.iou_valid[k] = true;
        rep.class_iou[k] = 100.0 * static_cast<double>(tp[k]) / static_cast<double>(uni);
        iou_sum += rep.class_iou[k];
        ++iou_n;
    }
    rep.mean_iou = iou_n > 0 ? iou_sum / iou_n : 0.0;
    return rep;
}

}  // namespace sepaint
