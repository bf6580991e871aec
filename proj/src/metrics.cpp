#include "l3guard/metrics.hpp"

#include "l3guard/errors.hpp"

namespace l3guard {

namespace {

double ratio(std::uint64_t num, std::uint64_t den)
{
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

} // namespace

Metrics compute_metrics(const ConfusionMatrix& cm)
{
    if (cm.total() == 0)
        throw EmptyEvaluation("no messages received a verdict");
    Metrics m;
    m.accuracy = ratio(cm.tp + cm.tn, cm.total());
    m.precision = ratio(cm.tp, cm.tp + cm.fp);
    m.recall = ratio(cm.tp, cm.tp + cm.fn);
    m.f1 = (m.precision + m.recall) == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    m.fpr = ratio(cm.fp, cm.fp + cm.tn);
    m.fnr = ratio(cm.fn, cm.fn + cm.tp);
    return m;
}

} // namespace l3guard
