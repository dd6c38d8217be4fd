#pragma once

#include <optional>
#include <span>
#include <string>

#include "addml/evaluation.hpp"
#include "addml/trainer.hpp"

namespace addml {

// Flat CSV renderings of engine results. Numbers use shortest round-trip
// formatting, so identical results give identical bytes.

/// Columns: record,setting,repeat,fold,auc,auc_std,instances,dims,outlier_pct
/// One "run" row per (repeat, fold), then one "summary" row per setting.
std::string cv_report_csv(std::span<const CvReport> reports);

/// Columns: epoch,train_loss,val_loss,distilled_size,tau_n,batches,loss_terms
std::string history_csv(const TrainReport& report);

/// Columns: row,score[,anomaly]; the decision column appears when tau is given.
std::string scores_csv(std::span<const double> scores, std::optional<double> tau);

struct CurvePoint {
  double value;
  CvReport report;
};

/// Columns: parameter,value,setting,mean_auc,std_auc
std::string curve_csv(std::string_view parameter, std::span<const CurvePoint> points);

}  // namespace addml
