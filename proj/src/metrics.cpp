#include "sphembed/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace sphembed {

long long ConfusionMatrix::total() const {
    return std::accumulate(counts.begin(), counts.end(), 0LL);
}

long long ConfusionMatrix::row_sum(int t) const {
    long long s = 0;
    for (int p = 0; p < n; ++p)
        s += at(t, p);
    return s;
}

long long ConfusionMatrix::col_sum(int p) const {
    long long s = 0;
    for (int t = 0; t < n; ++t)
        s += at(t, p);
    return s;
}

ConfusionMatrix confusion_matrix(const std::vector<int> &true_labels,
                                 const std::vector<int> &predicted_labels,
                                 int n_classes) {
    if (true_labels.size() != predicted_labels.size())
        throw contract_error("label sequences have different lengths");
    if (n_classes < 1)
        throw contract_error("need at least one class");
    ConfusionMatrix cm;
    cm.n = n_classes;
    cm.counts.assign(static_cast<std::size_t>(n_classes) * n_classes, 0);
    for (std::size_t i = 0; i < true_labels.size(); ++i) {
        const int t = true_labels[i], p = predicted_labels[i];
        if (t < 0 || t >= n_classes || p < 0 || p >= n_classes)
            throw contract_error("label outside [0, " +
                                 std::to_string(n_classes) + ") at index " +
                                 std::to_string(i));
        cm.at(t, p)++;
    }
    return cm;
}

MetricsReport classification_report(const ConfusionMatrix &cm) {
    const long long total = cm.total();
    if (total == 0)
        throw contract_error("classification_report over an empty matrix");
    MetricsReport r;
    r.cm = cm;
    const int n = cm.n;
    r.precision.resize(n);
    r.recall.resize(n);
    r.f1.resize(n);
    long long trace = 0;
    for (int c = 0; c < n; ++c) {
        const long long tp = cm.at(c, c);
        const long long row = cm.row_sum(c);
        const long long col = cm.col_sum(c);
        trace += tp;
        if (row == 0)
            r.warnings.push_back("class " + std::to_string(c) +
                                 " has no true samples");
        if (col == 0)
            r.warnings.push_back("class " + std::to_string(c) +
                                 " was never predicted");
        r.recall[c] = row ? static_cast<double>(tp) / row : 0.0;
        r.precision[c] = col ? static_cast<double>(tp) / col : 0.0;
        const double pr = r.precision[c] + r.recall[c];
        r.f1[c] = pr > 0.0 ? 2.0 * r.precision[c] * r.recall[c] / pr : 0.0;
    }
    r.per_class_accuracy = r.recall;
    r.average_accuracy = static_cast<double>(trace) / total;
    r.macro_f1 =
        std::accumulate(r.f1.begin(), r.f1.end(), 0.0) / static_cast<double>(n);
    r.micro_f1 = r.average_accuracy; // single-label multiclass identity
    const MccResult m = mcc(cm);
    r.per_class_mcc = m.per_class;
    r.multiclass_mcc = m.multiclass;
    return r;
}

MccResult mcc(const ConfusionMatrix &cm) {
    const long long total = cm.total();
    if (total == 0)
        throw contract_error("mcc over an empty matrix");
    const int n = cm.n;
    MccResult r;
    r.per_class.resize(n);
    for (int c = 0; c < n; ++c) {
        const double tp = static_cast<double>(cm.at(c, c));
        const double fn = static_cast<double>(cm.row_sum(c)) - tp;
        const double fp = static_cast<double>(cm.col_sum(c)) - tp;
        const double tn = static_cast<double>(total) - tp - fn - fp;
        const double denom = std::sqrt((tp + fp) * (tp + fn) * (tn + fp) *
                                       (tn + fn));
        r.per_class[c] = denom > 0.0 ? (tp * tn - fp * fn) / denom : 0.0;
    }

    // generalized correlation over the full matrix
    const double s = static_cast<double>(total);
    double c_trace = 0.0, pt = 0.0, pp = 0.0, tt = 0.0;
    for (int k = 0; k < n; ++k) {
        c_trace += static_cast<double>(cm.at(k, k));
        const double p_k = static_cast<double>(cm.col_sum(k));
        const double t_k = static_cast<double>(cm.row_sum(k));
        pt += p_k * t_k;
        pp += p_k * p_k;
        tt += t_k * t_k;
    }
    const double denom = std::sqrt((s * s - pp) * (s * s - tt));
    r.multiclass = denom > 0.0 ? (c_trace * s - pt) / denom : 0.0;
    return r;
}

AucResult roc_auc(const Tensor &scores, const std::vector<int> &true_labels) {
    if (scores.rank() != 2)
        throw contract_error("roc_auc: scores must be N×n");
    const std::size_t n = scores.dim(0);
    const std::size_t nc = scores.dim(1);
    if (true_labels.size() != n)
        throw contract_error("roc_auc: label count mismatch");

    AucResult r;
    r.per_class.resize(nc);
    double sum = 0.0;
    std::size_t defined = 0;
    for (std::size_t c = 0; c < nc; ++c) {
        // Mann-Whitney rank statistic with midranks for ties; this is
        // exactly the trapezoidal area under the tie-aware ROC curve.
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) {
                      return scores.at2(a, c) < scores.at2(b, c);
                  });
        std::vector<double> rank(n);
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && scores.at2(order[j + 1], c) ==
                                    scores.at2(order[i], c))
                ++j;
            const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
            for (std::size_t t = i; t <= j; ++t)
                rank[order[t]] = mid;
            i = j + 1;
        }
        std::size_t pos = 0;
        double rank_sum = 0.0;
        for (std::size_t t = 0; t < n; ++t)
            if (true_labels[t] == static_cast<int>(c)) {
                ++pos;
                rank_sum += rank[t];
            }
        const std::size_t neg = n - pos;
        if (pos == 0 || neg == 0) {
            r.per_class[c] = std::nullopt;
            continue;
        }
        const double auc =
            (rank_sum - 0.5 * static_cast<double>(pos) * (pos + 1)) /
            (static_cast<double>(pos) * static_cast<double>(neg));
        r.per_class[c] = auc;
        sum += auc;
        ++defined;
    }
    if (defined > 0)
        r.average = sum / static_cast<double>(defined);
    return r;
}

std::string format_report(const MetricsReport &report,
                          const std::vector<std::string> &class_names) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(4);
    const int n = report.cm.n;
    auto name = [&](int c) {
        return c < static_cast<int>(class_names.size())
                   ? class_names[c]
                   : "class-" + std::to_string(c);
    };
    os << "class           accuracy  precision  recall    f1        mcc";
    if (report.average_auc)
        os << "       auc";
    os << "\n";
    for (int c = 0; c < n; ++c) {
        os << name(c);
        for (std::size_t p = name(c).size(); p < 16; ++p)
            os << ' ';
        os << report.per_class_accuracy[c] << "    " << report.precision[c]
           << "     " << report.recall[c] << "    " << report.f1[c] << "    "
           << report.per_class_mcc[c];
        if (report.average_auc) {
            os << "    ";
            if (c < static_cast<int>(report.per_class_auc.size()) &&
                report.per_class_auc[c])
                os << *report.per_class_auc[c];
            else
                os << "--";
        }
        os << "\n";
    }
    os << "average accuracy: " << report.average_accuracy << "\n";
    os << "macro F1: " << report.macro_f1
       << "  micro F1: " << report.micro_f1 << "\n";
    os << "multiclass MCC: " << report.multiclass_mcc << "\n";
    if (report.average_auc)
        os << "average AUC: " << *report.average_auc << "\n";
    for (const auto &w : report.warnings)
        os << "warning: " << w << "\n";
    return os.str();
}

} // namespace sphembed
