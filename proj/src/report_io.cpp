#include "addml/report_io.hpp"

#include "addml/data_io.hpp"
#include "addml/scoring.hpp"

namespace addml {

std::string cv_report_csv(std::span<const CvReport> reports) {
  std::string out = "record,setting,repeat,fold,auc,auc_std,instances,dims,outlier_pct\n";
  for (const auto& rep : reports) {
    for (const auto& run : rep.runs) {
      out += "run,";
      out += to_string(rep.setting);
      out += "," + std::to_string(run.repeat) + "," + std::to_string(run.fold) + "," +
             format_double(run.auc) + ",,,,\n";
    }
  }
  for (const auto& rep : reports) {
    out += "summary,";
    out += to_string(rep.setting);
    out += ",,," + format_double(rep.mean_auc) + "," + format_double(rep.std_auc) + "," +
           std::to_string(rep.meta.instances) + "," + std::to_string(rep.meta.dims) + "," +
           format_double(rep.meta.outlier_percent) + "\n";
  }
  return out;
}

std::string history_csv(const TrainReport& report) {
  std::string out = "epoch,train_loss,val_loss,distilled_size,tau_n,batches,loss_terms\n";
  for (const auto& e : report.history) {
    out += std::to_string(e.epoch) + "," + format_double(e.train_loss) + "," +
           (e.val_loss ? format_double(*e.val_loss) : std::string()) + "," +
           std::to_string(e.distilled_size) + "," + format_double(e.tau_n) + "," +
           std::to_string(e.batches) + "," + std::to_string(e.loss_terms) + "\n";
  }
  return out;
}

std::string scores_csv(std::span<const double> scores, std::optional<double> tau) {
  std::string out = tau ? "row,score,anomaly\n" : "row,score\n";
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out += std::to_string(i) + "," + format_double(scores[i]);
    if (tau) out += "," + std::to_string(decide(scores[i], *tau).label);
    out += "\n";
  }
  return out;
}

std::string curve_csv(std::string_view parameter, std::span<const CurvePoint> points) {
  std::string out = "parameter,value,setting,mean_auc,std_auc\n";
  for (const auto& p : points) {
    out += std::string(parameter) + "," + format_double(p.value) + ",";
    out += to_string(p.report.setting);
    out += "," + format_double(p.report.mean_auc) + "," + format_double(p.report.std_auc) + "\n";
  }
  return out;
}

}  // namespace addml
