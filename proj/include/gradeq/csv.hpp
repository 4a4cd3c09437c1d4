#ifndef GRADEQ_CSV_HPP
#define GRADEQ_CSV_HPP

#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gradeq/datagen.hpp"
#include "gradeq/descent.hpp"
#include "gradeq/equilibrium.hpp"
#include "gradeq/pipelines.hpp"

namespace gradeq {

/// Shortest round-trip decimal form; parsing it back recovers the exact
/// double, which is what makes generate -> serialize -> ingest -> run
/// byte-identical to the in-process path.
inline std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

/// Locale-independent parse (dot decimal). Throws on trailing junk or
/// non-finite values.
inline double parse_double(const std::string& cell, std::size_t row) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last)
    throw std::runtime_error("csv: unparseable numeric cell '" + cell + "' at row " +
                             std::to_string(row));
  if (!std::isfinite(v))
    throw std::runtime_error("csv: non-finite cell at row " + std::to_string(row));
  return v;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace detail

enum class IngestSchema { regression, classification, battles };

/// Read a stream CSV. Columns are mapped by header name: y is required
/// ("f" or "pred" optional, defaulting to 0 with a warning), group:* columns
/// become the indicator vector in header order. Battle files need model_a,
/// model_b, winner; the outcome is y = 1{winner == model_b}.
inline Stream ingest_csv(std::istream& in, IngestSchema schema,
                         std::vector<std::string>* warnings = nullptr) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: empty input");
  auto header = detail::split_csv_line(line);
  std::map<std::string, std::size_t> col;
  std::vector<std::size_t> group_cols;
  std::vector<std::string> group_labels;
  for (std::size_t i = 0; i < header.size(); ++i) {
    col[header[i]] = i;
    if (header[i].rfind("group:", 0) == 0) {
      group_cols.push_back(i);
      group_labels.push_back(header[i].substr(6));
    }
  }

  auto need = [&](const std::string& name) {
    auto it = col.find(name);
    if (it == col.end()) throw std::runtime_error("csv: missing required column '" + name + "'");
    return it->second;
  };

  Stream stream;
  stream.group_labels = group_labels;

  if (schema == IngestSchema::battles) {
    std::size_t ca = need("model_a"), cb = need("model_b"), cw = need("winner");
    std::size_t row = 1;
    while (std::getline(in, line)) {
      ++row;
      if (line.empty()) continue;
      auto cells = detail::split_csv_line(line);
      if (cells.size() != header.size())
        throw std::runtime_error("csv: wrong cell count at row " + std::to_string(row));
      StreamRecord rec;
      rec.x_id = row - 2;
      rec.model_a = static_cast<int>(parse_double(cells[ca], row));
      rec.model_b = static_cast<int>(parse_double(cells[cb], row));
      int winner = static_cast<int>(parse_double(cells[cw], row));
      if (winner != rec.model_a && winner != rec.model_b)
        throw std::runtime_error("csv: winner is neither competitor at row " +
                                 std::to_string(row));
      rec.y = winner == rec.model_b ? 1.0 : 0.0;
      stream.records.push_back(rec);
    }
    return stream;
  }

  std::size_t cy = need("y");
  bool has_f = col.count("f") > 0 || col.count("pred") > 0;
  std::size_t cf = has_f ? (col.count("f") ? col["f"] : col["pred"]) : 0;
  if (!has_f && warnings)
    warnings->push_back("no f/pred column; base predictions default to 0");

  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size())
      throw std::runtime_error("csv: wrong cell count at row " + std::to_string(row));
    StreamRecord rec;
    rec.x_id = row - 2;
    rec.y = parse_double(cells[cy], row);
    rec.f = has_f ? parse_double(cells[cf], row) : 0.0;
    if (schema == IngestSchema::classification && (rec.y != 0.0 && rec.y != 1.0))
      throw std::runtime_error("csv: non-binary label at row " + std::to_string(row));
    for (std::size_t j = 0; j < group_cols.size(); ++j)
      rec.z.push_back(parse_double(cells[group_cols[j]], row));
    stream.records.push_back(std::move(rec));
  }
  return stream;
}

inline void write_stream_csv(std::ostream& out, const Stream& stream) {
  out << "y,f";
  for (const auto& label : stream.group_labels) out << ",group:" << label;
  out << "\n";
  for (const auto& rec : stream.records) {
    out << format_double(rec.y) << ',' << format_double(rec.f);
    for (double z : rec.z) out << ',' << format_double(z);
    out << "\n";
  }
}

inline void write_battles_csv(std::ostream& out, const Stream& stream) {
  out << "model_a,model_b,winner\n";
  for (const auto& rec : stream.records) {
    int winner = rec.y == 1.0 ? rec.model_b : rec.model_a;
    out << rec.model_a << ',' << rec.model_b << ',' << winner << "\n";
  }
}

/// Equilibrium report: one row per prefix, fixed columns.
inline void write_report_csv(std::ostream& out, const EquilibriumReport& rep) {
  out << "t,avg_grad_norm,identity_residual,bound,satisfied\n";
  for (std::size_t t = 0; t < rep.prefix_avg_grad_norm.size(); ++t) {
    out << (t + 1) << ',' << format_double(rep.prefix_avg_grad_norm[t]) << ','
        << format_double(t < rep.identity_residual.size() ? rep.identity_residual[t] : 0.0)
        << ',';
    if (rep.bound_series) {
      out << format_double((*rep.bound_series)[t]) << ','
          << (rep.satisfied[t] ? "true" : "false");
    } else {
      out << ',';
    }
    out << "\n";
  }
}

/// Flat JSON summary of a report, the companion of write_report_csv.
inline std::string report_summary_json(const EquilibriumReport& rep) {
  std::ostringstream out;
  double max_resid = 0.0;
  for (double r : rep.identity_residual) max_resid = std::max(max_resid, r);
  out << "{\"T\":" << rep.prefix_avg_grad_norm.size() << ",\"final_avg_grad_norm\":"
      << format_double(rep.prefix_avg_grad_norm.empty()
                           ? 0.0
                           : rep.prefix_avg_grad_norm.back())
      << ",\"max_identity_residual\":" << format_double(max_resid) << ",\"final_bound\":";
  if (rep.bound_series)
    out << format_double(rep.bound_series->back());
  else
    out << "null";
  out << ",\"bound_satisfaction_fraction\":"
      << format_double(rep.bound_satisfaction_fraction()) << "}";
  return out.str();
}

inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  if (!traj.dense) throw std::invalid_argument("write_trajectory_csv: dense trajectory required");
  std::size_t d = traj.theta_first.size();
  out << "t,eta,loss";
  for (std::size_t j = 0; j < d; ++j) out << ",theta:" << j;
  for (std::size_t j = 0; j < d; ++j) out << ",grad:" << j;
  out << "\n";
  for (std::size_t t = 0; t < traj.steps; ++t) {
    out << (t + 1) << ',' << format_double(traj.etas[t]) << ','
        << format_double(traj.loss_values.empty() ? 0.0 : traj.loss_values[t]);
    for (std::size_t j = 0; j < d; ++j) out << ',' << format_double(traj.thetas[t][j]);
    for (std::size_t j = 0; j < d; ++j) out << ',' << format_double(traj.grads[t][j]);
    out << "\n";
  }
}

/// Per-step metrics for the debiasing pipelines. Classification files carry
/// the unclamped prediction in an extra adjusted_raw column.
inline void write_debias_metrics(std::ostream& out, const Stream& stream,
                                 const PipelineResult& res, bool classification) {
  out << "t,f,y,adjustment,adjusted";
  if (classification) out << ",adjusted_raw";
  out << ",avg_bias,bound,satisfied\n";
  for (std::size_t t = 0; t < stream.size(); ++t) {
    const auto& rec = stream.records[t];
    out << (t + 1) << ',' << format_double(rec.f) << ',' << format_double(rec.y) << ','
        << format_double(res.adjustment[t]) << ',' << format_double(res.adjusted[t]);
    if (classification) out << ',' << format_double(res.adjusted_raw[t]);
    out << ',' << format_double(res.report.prefix_avg_grad_norm[t]) << ',';
    if (res.report.bound_series)
      out << format_double((*res.report.bound_series)[t]) << ','
          << (res.report.satisfied[t] ? "true" : "false");
    else
      out << ',';
    out << "\n";
  }
}

inline void write_multigroup_metrics(std::ostream& out, const Stream& stream,
                                     const MultigroupResult& res, bool classification) {
  out << "t,f,y,adjustment,adjusted";
  if (classification) out << ",adjusted_raw";
  for (const auto& label : stream.group_labels) out << ",group:" << label;
  out << ",marginal_bias\n";
  for (std::size_t t = 0; t < stream.size(); ++t) {
    const auto& rec = stream.records[t];
    out << (t + 1) << ',' << format_double(rec.f) << ',' << format_double(rec.y) << ','
        << format_double(res.base.adjustment[t]) << ','
        << format_double(res.base.adjusted[t]);
    if (classification) out << ',' << format_double(res.base.adjusted_raw[t]);
    for (double z : rec.z) out << ',' << format_double(z);
    out << ',' << format_double(res.marginal_bias[t]) << "\n";
  }
}

inline void write_group_reports_csv(std::ostream& out, const MultigroupResult& res) {
  out << "group,count,final_bias,final_bound,bound_meaningful\n";
  for (const auto& gr : res.groups) {
    out << gr.label << ',' << gr.count << ',';
    if (gr.is_null()) {
      out << ",,";
    } else {
      out << format_double(gr.final_bias()) << ',';
      if (gr.bound_series)
        out << format_double(gr.bound_series->back()) << ','
            << (gr.bound_meaningful ? "true" : "false");
      else
        out << ',';
    }
    out << "\n";
  }
}

inline void write_quantile_metrics(std::ostream& out, const Stream& stream,
                                   const QuantileTrackResult& res) {
  out << "t,f,y,adjustment,adjusted,covered,coverage_gap,bound,satisfied\n";
  for (std::size_t t = 0; t < stream.size(); ++t) {
    const auto& rec = stream.records[t];
    bool covered = t == 0 ? res.coverage_count[0] == 1
                          : res.coverage_count[t] > res.coverage_count[t - 1];
    out << (t + 1) << ',' << format_double(rec.f) << ',' << format_double(rec.y) << ','
        << format_double(res.adjusted[t] - rec.f) << ',' << format_double(res.adjusted[t])
        << ',' << (covered ? 1 : 0) << ',' << format_double(res.coverage_gap[t]) << ',';
    if (t < res.bound_series.size())
      out << format_double(res.bound_series[t]) << ','
          << (res.satisfied[t] ? "true" : "false");
    else
      out << ',';
    out << "\n";
  }
}

inline void write_ensemble_metrics(std::ostream& out, const Stream& stream,
                                   const EnsembleResult& res) {
  std::size_t K = res.expert_loss_sum.size();
  out << "t,f,y,adjustment,adjusted,coverage_gap";
  for (std::size_t k = 0; k < K; ++k) out << ",weight:" << k;
  for (std::size_t k = 0; k < K; ++k) out << ",expert_theta:" << k;
  out << "\n";
  for (std::size_t t = 0; t < stream.size(); ++t) {
    const auto& rec = stream.records[t];
    out << (t + 1) << ',' << format_double(rec.f) << ',' << format_double(rec.y) << ','
        << format_double(res.adjusted[t] - rec.f) << ',' << format_double(res.adjusted[t])
        << ',' << format_double(res.coverage_gap[t]);
    for (std::size_t k = 0; k < K; ++k) out << ',' << format_double(res.weights[t][k]);
    for (std::size_t k = 0; k < K; ++k)
      out << ',' << format_double(res.expert_thetas[t][k]);
    out << "\n";
  }
}

inline void write_decorrelate_metrics(std::ostream& out, const Stream& stream,
                                      const DecorrelateResult& res, bool classification) {
  out << "t,f,y,adjustment,adjusted";
  if (classification) out << ",adjusted_raw";
  out << ",covariance_norm,bound,satisfied\n";
  for (std::size_t t = 0; t < stream.size(); ++t) {
    const auto& rec = stream.records[t];
    out << (t + 1) << ',' << format_double(rec.f) << ',' << format_double(rec.y) << ','
        << format_double(res.adjustment[t]) << ',' << format_double(res.adjusted[t]);
    if (classification) out << ',' << format_double(res.adjusted_raw[t]);
    out << ',' << format_double(res.covariance_series[t]) << ','
        << format_double(res.bound_series[t]) << ','
        << (res.satisfied[t] ? "true" : "false") << "\n";
  }
}

inline void write_elo_metrics(std::ostream& out, const EloResult& res) {
  out << "t,model_a,model_b,y,p\n";
  for (std::size_t t = 0; t < res.p_series.size(); ++t) {
    out << (t + 1) << ',' << res.a_series[t] << ',' << res.b_series[t] << ','
        << format_double(res.y_series[t]) << ',' << format_double(res.p_series[t])
        << "\n";
  }
}

inline void write_elo_table_csv(std::ostream& out, const EloTable& table) {
  out << "model,score,count,signed_bias,raw_bias\n";
  for (std::size_t m = 0; m < table.scores.size(); ++m) {
    out << m << ',' << format_double(table.scores[m]) << ',' << table.counts[m] << ',';
    auto sb = table.signed_bias(m);
    auto rb = table.raw_bias(m);
    if (sb) out << format_double(*sb);
    out << ',';
    if (rb) out << format_double(*rb);
    out << "\n";
  }
}

}  // namespace gradeq

#endif
