#pragma once

// Per-class tracking evaluation laid out as MOTA, MOTP, IDF1, IDR, IDP, MT, IDs,
// plus an "All" row that averages the class rows without weighting.

#include <algorithm>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "ibtrack/config.hpp"
#include "ibtrack/formats.hpp"
#include "ibtrack/metrics.hpp"

namespace ibtrack {

struct EvalOptions
{
  double match_iou = 0.5;
  bool mota_id = false;  // MOTA from IDFN + IDFP + IDSW instead of per-frame FN + FP + IDSW
  bool include_inferred = true;
};

struct EvalRow
{
  std::string label;
  std::optional<double> mota;
  std::optional<double> motp;  // empty when nothing matched
  double idf1 = 0.0;
  double idr = 0.0;
  double idp = 0.0;
  double mt = 0.0;
  double ids = 0.0;
  MotCounts counts;
  IdCounts id_counts;
};

struct EvalReport
{
  std::vector<EvalRow> rows;  // one per class with ground truth, then "All"
  std::vector<int> skipped_classes;

  const EvalRow& all() const { return rows.back(); }
};

inline EvalReport evaluate(const std::vector<GtRecord>& gt, const std::vector<TrackRecord>& tracks,
                           const EvalOptions& opt = {})
{
  int last_frame = 0;
  for (const auto& g : gt) {
    last_frame = std::max(last_frame, g.frame);
  }
  EvalReport rep;
  for (int c = 0; c < kNumClasses; ++c) {
    std::vector<GtRecord> g;
    std::vector<TrackRecord> h;
    for (const auto& r : gt) {
      if (r.class_id == c) g.push_back(r);
    }
    for (const auto& r : tracks) {
      if (r.class_id == c && (opt.include_inferred || r.status == TrackStatus::matched)) {
        h.push_back(r);
      }
    }
    // A hypothesis outside the sequence is a data mismatch even for skipped classes.
    detail::check_frame_range(g, h, last_frame);
    if (g.empty()) {
      rep.skipped_classes.push_back(c);
      continue;
    }
    const ClearResult clear = clear_match_detail(g, h, opt.match_iou, last_frame);
    const IdMetrics idm = id_metrics(g, h, opt.match_iou, last_frame);
    EvalRow row;
    row.label = std::string(class_name(c));
    row.counts = clear.counts;
    row.id_counts = idm.counts;
    if (opt.mota_id) {
      MotCounts alt = clear.counts;
      alt.fn_total = idm.counts.idfn;
      alt.fp_total = idm.counts.idfp;
      row.mota = mota(alt);
    } else {
      row.mota = mota(clear.counts);
    }
    if (clear.counts.match_total > 0) {
      row.motp = motp(clear.counts);
    }
    row.idf1 = idm.idf1;
    row.idr = idm.idr;
    row.idp = idm.idp;
    row.mt = mostly_tracked(clear);
    row.ids = static_cast<double>(clear.counts.idsw_total);
    rep.rows.push_back(std::move(row));
  }

  EvalRow all;
  all.label = "All";
  if (!rep.rows.empty()) {
    const auto n = static_cast<double>(rep.rows.size());
    double mota_sum = 0.0;
    double motp_sum = 0.0;
    int motp_n = 0;
    for (const auto& r : rep.rows) {
      mota_sum += *r.mota;
      if (r.motp) {
        motp_sum += *r.motp;
        ++motp_n;
      }
      all.idf1 += r.idf1 / n;
      all.idr += r.idr / n;
      all.idp += r.idp / n;
      all.mt += r.mt / n;
      all.ids += r.ids / n;
      all.counts.fn_total += r.counts.fn_total;
      all.counts.fp_total += r.counts.fp_total;
      all.counts.idsw_total += r.counts.idsw_total;
      all.counts.gt_total += r.counts.gt_total;
      all.counts.overlap_sum += r.counts.overlap_sum;
      all.counts.match_total += r.counts.match_total;
      all.id_counts.idtp += r.id_counts.idtp;
      all.id_counts.idfp += r.id_counts.idfp;
      all.id_counts.idfn += r.id_counts.idfn;
    }
    all.mota = mota_sum / n;
    if (motp_n > 0) {
      all.motp = motp_sum / motp_n;
    }
  }
  rep.rows.push_back(std::move(all));
  return rep;
}

namespace detail {

inline std::string percent(std::optional<double> v)
{
  if (!v) {
    return "-";
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", *v * 100.0);
  return buf;
}

inline std::string count_cell(double v, bool fractional)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, fractional ? "%.1f" : "%.0f", v);
  return buf;
}

inline std::string pad(const std::string& s, std::size_t width)
{
  return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

}  // namespace detail

inline std::string format_table(const EvalReport& rep, const std::string& model = {})
{
  const std::size_t cw = 10;
  std::string out;
  if (!model.empty()) {
    out += detail::pad("Model", cw);
  }
  out += detail::pad("Class", 16);
  for (const char* h : {"MOTA", "MOTP", "IDF1", "IDR", "IDP", "MT", "IDs"}) {
    out += detail::pad(h, cw);
  }
  out += '\n';
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const auto& r = rep.rows[i];
    const bool all = i + 1 == rep.rows.size();
    if (!model.empty()) {
      out += detail::pad(i == 0 ? model : "", cw);
    }
    out += detail::pad(r.label, 16);
    out += detail::pad(detail::percent(r.mota), cw);
    out += detail::pad(detail::percent(r.motp), cw);
    out += detail::pad(detail::percent(r.idf1), cw);
    out += detail::pad(detail::percent(r.idr), cw);
    out += detail::pad(detail::percent(r.idp), cw);
    out += detail::pad(detail::count_cell(r.mt, all), cw);
    out += detail::count_cell(r.ids, all);
    out += '\n';
  }
  return out;
}

/// Machine-readable copy; ratios as plain numbers, empty cell when undefined.
inline std::string format_csv(const EvalReport& rep)
{
  auto num = [](std::optional<double> v) { return v ? format_double(*v) : std::string(); };
  std::string out = "class,mota,motp,idf1,idr,idp,mt,ids,gt,fn,fp,matches,idtp,idfp,idfn\n";
  for (const auto& r : rep.rows) {
    out += r.label + "," + num(r.mota) + "," + num(r.motp) + "," + format_double(r.idf1) + "," +
           format_double(r.idr) + "," + format_double(r.idp) + "," + format_double(r.mt) + "," +
           format_double(r.ids) + "," + std::to_string(r.counts.gt_total) + "," +
           std::to_string(r.counts.fn_total) + "," + std::to_string(r.counts.fp_total) + "," +
           std::to_string(r.counts.match_total) + "," + std::to_string(r.id_counts.idtp) + "," +
           std::to_string(r.id_counts.idfp) + "," + std::to_string(r.id_counts.idfn) + "\n";
  }
  return out;
}

}  // namespace ibtrack
