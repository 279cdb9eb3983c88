#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sphembed/tensor.hpp"

namespace sphembed {

/// Rows = true class, columns = predicted class.
struct ConfusionMatrix {
    int n = 0;
    std::vector<long long> counts; // n*n

    long long at(int t, int p) const { return counts[t * n + p]; }
    long long &at(int t, int p) { return counts[t * n + p]; }
    long long total() const;
    long long row_sum(int t) const;
    long long col_sum(int p) const;
};

ConfusionMatrix confusion_matrix(const std::vector<int> &true_labels,
                                 const std::vector<int> &predicted_labels,
                                 int n_classes);

struct MetricsReport {
    ConfusionMatrix cm;
    // per-class "accuracy" is class-conditional accuracy, i.e. recall
    std::vector<double> per_class_accuracy;
    std::vector<double> precision;
    std::vector<double> recall;
    std::vector<double> f1;
    double average_accuracy = 0.0;
    double macro_f1 = 0.0;
    double micro_f1 = 0.0;
    std::vector<double> per_class_mcc;
    double multiclass_mcc = 0.0;
    std::vector<std::optional<double>> per_class_auc;
    std::optional<double> average_auc;
    std::vector<std::string> warnings;
};

/// Accuracy / precision / recall / F1 family from a confusion matrix.
/// Degenerate rows or columns yield 0 for the affected rate, with a
/// warning recorded in the report.
MetricsReport classification_report(const ConfusionMatrix &cm);

struct MccResult {
    std::vector<double> per_class; // one-vs-rest binary MCC
    double multiclass = 0.0;       // generalized correlation form
};

/// Zero denominators yield MCC 0 by convention.
MccResult mcc(const ConfusionMatrix &cm);

struct AucResult {
    std::vector<std::optional<double>> per_class;
    std::optional<double> average; // unweighted mean of defined classes
};

/// One-vs-rest AUC per class from an N×n score matrix, computed as the
/// rank statistic (ties count 1/2). Classes with no positives or no
/// negatives are reported as absent.
AucResult roc_auc(const Tensor &scores, const std::vector<int> &true_labels);

/// Table-style plain-text rendering of a report.
std::string format_report(const MetricsReport &report,
                          const std::vector<std::string> &class_names = {});

} // namespace sphembed
