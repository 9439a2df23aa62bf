#include "har/report.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "har/errors.hpp"

namespace har {

namespace {

using nlohmann::json;

// Table-style "94.86±7.65" percent string, two decimal places.
std::string percent_pair(const FoldSummary::Stat& st) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f±%.2f", st.mean * 100.0, st.stddev * 100.0);
    return buf;
}

json metric_json(const MetricSet& m) {
    return json{{"accuracy", m.accuracy},
                {"precision", m.macro_precision},
                {"recall", m.macro_recall},
                {"f1", m.macro_f1},
                {"per_class_precision", m.precision},
                {"per_class_recall", m.recall},
                {"per_class_f1", m.f1}};
}

json confusion_json(const ConfusionMatrix& cm) {
    json rows = json::array();
    for (std::size_t i = 0; i < cm.classes; ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < cm.classes; ++j) row.push_back(cm.at(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

json stat_json(const FoldSummary::Stat& st) {
    return json{{"mean", st.mean}, {"std", st.stddev}};
}

json history_json(const TrainHistory& h) {
    json epochs = json::array();
    for (const EpochRecord& r : h.epochs)
        epochs.push_back(json{{"epoch", r.epoch},
                              {"train_loss", r.train_loss},
                              {"val_loss", r.val_loss},
                              {"val_acc", r.val_acc}});
    return json{{"epochs", std::move(epochs)},
                {"stop_epoch", h.stop_epoch},
                {"stop_reason", h.stop_reason}};
}

}  // namespace

std::string render_report(const RunReport& report) {
    json doc;
    doc["config"] = report.config;

    json folds = json::array();
    json histories = json::array();
    for (const FoldReport& f : report.folds) {
        json entry = metric_json(f.metrics);
        entry["fold_index"] = f.fold_index;
        entry["confusion"] = confusion_json(f.confusion);
        folds.push_back(std::move(entry));
        json hist = history_json(f.history);
        hist["fold_index"] = f.fold_index;
        histories.push_back(std::move(hist));
    }
    doc["folds"] = std::move(folds);
    doc["histories"] = std::move(histories);

    if (report.aggregate) {
        const FoldSummary& agg = *report.aggregate;
        doc["aggregate"] = json{{"accuracy", stat_json(agg.accuracy)},
                                {"precision", stat_json(agg.precision)},
                                {"recall", stat_json(agg.recall)},
                                {"f1", stat_json(agg.f1)},
                                {"accuracy_pct", percent_pair(agg.accuracy)},
                                {"precision_pct", percent_pair(agg.precision)},
                                {"recall_pct", percent_pair(agg.recall)},
                                {"f1_pct", percent_pair(agg.f1)}};
        json box;
        json acc = json::array(), prec = json::array(), rec = json::array(), f1 = json::array();
        for (const MetricSet& m : agg.folds) {
            acc.push_back(m.accuracy);
            prec.push_back(m.macro_precision);
            rec.push_back(m.macro_recall);
            f1.push_back(m.macro_f1);
        }
        box["accuracy"] = std::move(acc);
        box["precision"] = std::move(prec);
        box["recall"] = std::move(rec);
        box["f1"] = std::move(f1);
        doc["boxplot"] = std::move(box);
    }

    return doc.dump(2) + "\n";
}

void write_report(const RunReport& report, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open for write: " + path);
    os << render_report(report);
    if (!os) throw DataError("write failed: " + path);
}

}  // namespace har
