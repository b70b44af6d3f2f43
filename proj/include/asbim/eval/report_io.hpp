#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "asbim/eval/cross_validate.hpp"
#include "asbim/text_io.hpp"

namespace asbim::eval {

/// Per-dyad attention weights (masked positions 0) and γ of a trained model.
inline std::vector<AttentionRow> export_attention(const Dataset& dataset, const model::ModelParameters& params,
                                                  const std::string& method = "asbim", int imputation = 0) {
  std::vector<AttentionRow> rows;
  for (const auto& d : dataset) {
    const Vec a = model::attention_weights(d, params);
    rows.push_back({method, imputation, d.dyad_id, std::vector<double>(a.data(), a.data() + a.size()), params.gamma()});
  }
  return rows;
}

namespace report_detail {
inline nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }
}  // namespace report_detail

inline nlohmann::json to_json(const EvaluationReport& r) {
  using report_detail::opt;
  nlohmann::json j;
  j["config"] = r.config_echo;
  j["cv"] = {{"k", r.options.k},
             {"m_imputations", r.options.m_imputations},
             {"seed", r.options.seed},
             {"max_len", r.options.max_len},
             {"imputation_noise_scale", r.options.imputation_noise_scale}};
  j["methods"] = r.methods;
  auto& aggs = j["aggregate"] = nlohmann::json::array();
  for (const auto& a : r.aggregates) {
    aggs.push_back({{"method", a.method},
                    {"mean_mse", a.mean_mse},
                    {"min_mse", a.min_mse},
                    {"max_mse", a.max_mse},
                    {"mean_r", opt(a.mean_r)},
                    {"min_r", opt(a.min_r)},
                    {"max_r", opt(a.max_r)},
                    {"mean_gamma", opt(a.mean_gamma)},
                    {"imputations_gamma_above_half", a.gamma_above_half}});
  }
  auto& imps = j["per_imputation"] = nlohmann::json::array();
  for (const auto& s : r.imputations) {
    imps.push_back({{"method", s.method},
                    {"imputation", s.imputation},
                    {"mean_mse", s.mean_mse},
                    {"mean_r", opt(s.mean_r)},
                    {"gamma", opt(s.mean_gamma)}});
  }
  auto& folds = j["per_fold"] = nlohmann::json::array();
  for (const auto& f : r.folds) {
    folds.push_back({{"method", f.method},
                     {"imputation", f.imputation},
                     {"fold", f.fold},
                     {"n_test", f.n_test},
                     {"mse", f.mse},
                     {"r", opt(f.r)},
                     {"gamma", opt(f.gamma)}});
  }
  return j;
}

inline std::string metrics_csv(const EvaluationReport& r) {
  std::string out = "model,imputation,fold,mse,r\n";
  for (const auto& f : r.folds) {
    out += f.method + ',' + std::to_string(f.imputation) + ',' + std::to_string(f.fold) + ',' +
           io::format_double(f.mse) + ',' + io::format_optional(f.r) + '\n';
  }
  return out;
}

inline std::string predictions_csv(const EvaluationReport& r) {
  std::string out = "model,dyad_id,imputation,fold,pred,obs\n";
  for (const auto& p : r.predictions) {
    out += p.method + ',' + p.dyad_id + ',' + std::to_string(p.imputation) + ',' + std::to_string(p.fold) + ',' +
           io::format_double(p.pred) + ',' + io::format_double(p.obs) + '\n';
  }
  return out;
}

inline std::string attention_csv(const std::vector<AttentionRow>& rows) {
  std::string out = "model,imputation,dyad_id,position,alpha\n";
  for (const auto& a : rows) {
    for (std::size_t i = 0; i < a.alpha.size(); ++i) {
      out += a.method + ',' + std::to_string(a.imputation) + ',' + a.dyad_id + ',' + std::to_string(i + 1) + ',' +
             io::format_double(a.alpha[i]) + '\n';
    }
  }
  return out;
}

/// Writes report.json, metrics.csv, predictions.csv, attention.csv and config.txt into `dir`.
inline void write_report(const EvaluationReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  io::write_file((dir / "report.json").string(), to_json(r).dump(2) + "\n");
  io::write_file((dir / "metrics.csv").string(), metrics_csv(r));
  io::write_file((dir / "predictions.csv").string(), predictions_csv(r));
  io::write_file((dir / "attention.csv").string(), attention_csv(r.attention));
  io::write_file((dir / "config.txt").string(), r.config_echo);
}

}  // namespace asbim::eval
