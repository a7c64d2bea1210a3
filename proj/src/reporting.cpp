#include "ucahar/reporting.hpp"

#include "ucahar/io.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ucahar {

namespace {

constexpr const char* kComponentNames[5] = {"L_A", "L_PP", "L_U", "L_d", "L_total"};

std::array<double, 5> components(const LossBreakdown& b) {
  return {b.activity, b.context, b.user, b.contrastive, b.total};
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string pad(std::string s, size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

}  // namespace

void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricsReport> reports) {
  std::ostringstream out;
  out << "head,label,tp,fp,tn,fn,precision,recall,f1,mcc\n";
  for (const auto& r : reports) {
    for (const auto& l : r.per_label) {
      out << to_string(r.head) << ',' << l.label << ',' << l.counts.tp << ',' << l.counts.fp << ','
          << l.counts.tn << ',' << l.counts.fn << ',' << format_double(l.precision) << ','
          << format_double(l.recall) << ',' << format_double(l.f1) << ',' << format_double(l.mcc)
          << '\n';
    }
  }
  write_text(path, out.str());
}

std::vector<MetricsReport> read_metrics_csv(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty() || lines.front() != "head,label,tp,fp,tn,fn,precision,recall,f1,mcc") {
    throw IoError("'" + path.string() + "' is not a metrics report");
  }
  std::vector<MetricsReport> reports;
  for (size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_fields(lines[i]);
    if (f.size() != 10) throw IoError("metrics rows need 10 fields");
    const HeadKind head = parse_head_kind(f[0]);
    if (reports.empty() || reports.back().head != head) reports.push_back({head, {}, 0.0, 0.0});
    LabelMetrics m;
    m.label = f[1];
    m.counts = {std::stoll(f[2]), std::stoll(f[3]), std::stoll(f[4]), std::stoll(f[5])};
    m.precision = parse_double(f[6]);
    m.recall = parse_double(f[7]);
    m.f1 = parse_double(f[8]);
    m.mcc = parse_double(f[9]);
    reports.back().per_label.push_back(std::move(m));
  }
  for (auto& r : reports) {
    double mcc_sum = 0.0, f1_sum = 0.0;
    for (const auto& l : r.per_label) {
      mcc_sum += l.mcc;
      f1_sum += l.f1;
    }
    const auto n = static_cast<double>(r.per_label.size());
    r.macro_mcc = mcc_sum / n;
    r.macro_f1 = f1_sum / n;
  }
  return reports;
}

std::string render_metrics_table(std::span<const MetricsReport> reports) {
  size_t width = 5;
  for (const auto& r : reports) {
    for (const auto& l : r.per_label) width = std::max(width, l.label.size());
  }
  std::ostringstream out;
  out << pad("head", 9) << pad("label", width + 2) << pad("tp", 8) << pad("fp", 8) << pad("tn", 8)
      << pad("fn", 8) << pad("prec", 7) << pad("rec", 7) << pad("f1", 7) << "mcc\n";
  for (const auto& r : reports) {
    const std::string head(to_string(r.head));
    for (const auto& l : r.per_label) {
      out << pad(head, 9) << pad(l.label, width + 2) << pad(std::to_string(l.counts.tp), 8)
          << pad(std::to_string(l.counts.fp), 8) << pad(std::to_string(l.counts.tn), 8)
          << pad(std::to_string(l.counts.fn), 8) << pad(fixed3(l.precision), 7)
          << pad(fixed3(l.recall), 7) << pad(fixed3(l.f1), 7) << fixed3(l.mcc) << '\n';
    }
    out << pad(head, 9) << pad("macro", width + 2) << pad("", 46) << pad(fixed3(r.macro_f1), 7)
        << fixed3(r.macro_mcc) << '\n';
  }
  return out.str();
}

std::string format_cell(double mcc, double f1) { return fixed3(mcc) + "/" + fixed3(f1); }

ScorePair parse_cell(std::string_view cell) {
  const auto slash = cell.find('/');
  if (slash == std::string_view::npos) throw IoError("cell '" + std::string(cell) + "' lacks '/'");
  auto number = [](std::string_view s) {
    std::string text(s);
    if (!text.empty() && text.front() == '.') text.insert(text.begin(), '0');
    if (text.size() > 1 && text[0] == '-' && text[1] == '.') text.insert(1, "0");
    return parse_double(text);
  };
  return {number(cell.substr(0, slash)), number(cell.substr(slash + 1))};
}

std::string render_ablation_table(std::span<const AblationRow> rows) {
  require(!rows.empty(), "ablation table needs at least one variant");
  std::ostringstream out;
  out << pad("variant", 10) << "| " << pad("activity", 14) << "| " << pad("context", 14) << "| user\n";
  for (const auto& row : rows) {
    out << pad(std::string(to_string(row.variant)), 10);
    for (size_t h = 0; h < 3; ++h) {
      const auto& r = row.test[h];
      out << "| " << (h < 2 ? pad(format_cell(r.macro_mcc, r.macro_f1), 14)
                            : format_cell(r.macro_mcc, r.macro_f1));
    }
    out << '\n';
  }
  return out.str();
}

std::vector<AblationTableRow> parse_ablation_table(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::vector<AblationTableRow> rows;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> parts;
    std::istringstream ls(line);
    std::string part;
    while (std::getline(ls, part, '|')) {
      const auto b = part.find_first_not_of(' ');
      const auto e = part.find_last_not_of(' ');
      parts.push_back(b == std::string::npos ? "" : part.substr(b, e - b + 1));
    }
    if (parts.size() != 4) throw IoError("ablation rows need a variant and three cells");
    AblationTableRow row;
    row.variant = parts[0];
    for (size_t h = 0; h < 3; ++h) row.heads[h] = parse_cell(parts[h + 1]);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_step_history(const std::filesystem::path& path, std::span<const StepRecord> steps) {
  std::ostringstream out;
  out << "step,L_A,L_PP,L_U,L_d,L_total\n";
  for (const auto& s : steps) {
    out << s.step;
    for (double v : components(s.loss)) out << ',' << format_double(v);
    out << '\n';
  }
  write_text(path, out.str());
}

std::vector<StepRecord> read_step_history(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty() || lines.front() != "step,L_A,L_PP,L_U,L_d,L_total") {
    throw IoError("'" + path.string() + "' is not a training history");
  }
  std::vector<StepRecord> out;
  for (size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_fields(lines[i]);
    if (f.size() != 6) throw IoError("history rows need 6 fields");
    StepRecord s;
    s.step = std::stoll(f[0]);
    s.loss = {parse_double(f[1]), parse_double(f[2]), parse_double(f[3]), parse_double(f[4]),
              parse_double(f[5])};
    out.push_back(s);
  }
  return out;
}

LossCurves loss_curves(const TrainHistory& history) {
  LossCurves curves;
  for (const auto& e : history.epochs) {
    curves.epochs.push_back(e.epoch);
    const auto c = components(e.train_loss);
    for (size_t k = 0; k < 5; ++k) curves.series[k].push_back(c[k]);
  }
  return curves;
}

std::array<std::filesystem::path, 2> render_loss_curves(const TrainHistory& history,
                                                        const std::filesystem::path& prefix) {
  require(!history.epochs.empty(), "loss curves need at least one epoch");
  const LossCurves curves = loss_curves(history);
  std::filesystem::path csv = prefix;
  csv += ".csv";
  std::filesystem::path svg = prefix;
  svg += ".svg";

  std::ostringstream data;
  data << "epoch,L_A,L_PP,L_U,L_d,L_total\n";
  for (size_t i = 0; i < curves.epochs.size(); ++i) {
    data << curves.epochs[i];
    for (size_t k = 0; k < 5; ++k) data << ',' << format_double(curves.series[k][i]);
    data << '\n';
  }
  write_text(csv, data.str());

  constexpr double width = 640, height = 400, margin = 50;
  double y_max = 0.0;
  for (const auto& s : curves.series) {
    for (double v : s) y_max = std::max(y_max, v);
  }
  if (y_max <= 0.0) y_max = 1.0;
  const double x_span = std::max<double>(1.0, static_cast<double>(curves.epochs.size() - 1));
  static const char* colors[5] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#000000"};

  std::ostringstream plot;
  plot << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  plot << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  plot << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin
       << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
  plot << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
       << height - margin << "\" stroke=\"black\"/>\n";
  plot << "<text x=\"" << width / 2 << "\" y=\"" << height - 15 << "\">epoch</text>\n";
  plot << "<text x=\"5\" y=\"" << margin - 10 << "\">" << fixed3(y_max) << "</text>\n";
  for (size_t k = 0; k < 5; ++k) {
    plot << "<polyline fill=\"none\" stroke=\"" << colors[k] << "\" points=\"";
    for (size_t i = 0; i < curves.epochs.size(); ++i) {
      const double x = margin + (width - 2 * margin) * static_cast<double>(i) / x_span;
      const double y = height - margin - (height - 2 * margin) * curves.series[k][i] / y_max;
      plot << (i ? " " : "") << x << ',' << y;
    }
    plot << "\"/>\n";
    plot << "<text x=\"" << width - margin - 60 << "\" y=\"" << margin + 15 * static_cast<double>(k)
         << "\" fill=\"" << colors[k] << "\">" << kComponentNames[k] << "</text>\n";
  }
  plot << "</svg>\n";
  write_text(svg, plot.str());
  return {csv, svg};
}

LossCurves read_loss_curves(const std::filesystem::path& csv) {
  const auto lines = read_lines(csv);
  if (lines.empty() || lines.front() != "epoch,L_A,L_PP,L_U,L_d,L_total") {
    throw IoError("'" + csv.string() + "' is not a loss-curve file");
  }
  LossCurves curves;
  for (size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_fields(lines[i]);
    if (f.size() != 6) throw IoError("loss-curve rows need 6 fields");
    curves.epochs.push_back(std::stoll(f[0]));
    for (size_t k = 0; k < 5; ++k) curves.series[k].push_back(parse_double(f[k + 1]));
  }
  return curves;
}

void RunArtifact::verify() const {
  auto exists = [](const std::filesystem::path& p) {
    if (!std::filesystem::exists(p)) throw IoError("run artifact '" + p.string() + "' is missing");
  };
  exists(config_snapshot);
  if (!nlohmann::json::accept(read_text(config_snapshot))) {
    throw IoError("config snapshot '" + config_snapshot.string() + "' is not valid JSON");
  }
  exists(history);
  (void)read_step_history(history);
  for (const auto& r : reports) {
    exists(r);
    (void)read_metrics_csv(r);
  }
  exists(checkpoint);
  (void)read_checkpoint(checkpoint);
}

}  // namespace ucahar
