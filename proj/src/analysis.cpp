#include "seqrank/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace seqrank {

namespace {

using nlohmann::json;

// A trace for one direction plus the word labels in reading order.
struct DirectedRun {
  ForwardTrace trace;
  std::vector<std::string> words;
};

template <class P>
DirectedRun run_direction(const Directed<P>& model,
                          const std::vector<Token>& tokens,
                          const TrigramSequence& seq, Direction dir) {
  if (dir == Direction::kForward) {
    return {forward(model.fwd, seq), tokens};
  }
  if (!model.bwd) {
    throw DimMismatch("backward direction requested on unidirectional model");
  }
  std::vector<std::string> rev_words(tokens.rbegin(), tokens.rend());
  return {forward(*model.bwd, reversed(seq)), std::move(rev_words)};
}

DirectedRun run_direction_any(const AnyModel& model,
                              const std::vector<Token>& tokens,
                              const TrigramSequence& seq, Direction dir) {
  return std::visit(
      [&](const auto& m) { return run_direction(m, tokens, seq, dir); },
      model);
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (const char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

std::vector<std::string> csv_split(const std::string& line, int lineno) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"' && cur.empty()) {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) throw ParseError(lineno, "unterminated quote");
  fields.push_back(std::move(cur));
  return fields;
}

}  // namespace

const char* grid_kind_name(GridKind k) {
  switch (k) {
    case GridKind::kGateI: return "input_gate";
    case GridKind::kGateF: return "forget_gate";
    case GridKind::kGateO: return "output_gate";
    case GridKind::kCell: return "cell_state";
    case GridKind::kOutput: return "output";
  }
  return "output";
}

std::vector<ActivationGrid> dump_activations(std::string_view sentence,
                                             const AnyModel& model,
                                             const TrigramDict& dict,
                                             Direction dir) {
  const auto tokens = tokenize(sentence);
  if (tokens.empty()) throw EmptySentence();
  const TrigramSequence seq = hash_sentence(sentence, dict);
  DirectedRun run = run_direction_any(model, tokens, seq, dir);

  std::vector<ActivationGrid> grids;
  if (run.trace.arch == Arch::kLstm) {
    grids.push_back({GridKind::kGateI, run.words, run.trace.gate_i});
    grids.push_back({GridKind::kGateF, run.words, run.trace.gate_f});
    grids.push_back({GridKind::kGateO, run.words, run.trace.gate_o});
    grids.push_back({GridKind::kCell, run.words, run.trace.cell});
    grids.push_back({GridKind::kOutput, run.words, run.trace.output});
  } else {
    grids.push_back({GridKind::kOutput, run.words, run.trace.output});
  }
  return grids;
}

std::vector<int> top_active_cells(const MatrixXd& y_grid, int top_k) {
  if (top_k < 1) throw DataError("top_k must be >= 1");
  const Index n = y_grid.rows();
  const VectorXd final_abs = y_grid.col(y_grid.cols() - 1).cwiseAbs();
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return final_abs(a) > final_abs(b);  // stable: ties keep lower index first
  });
  idx.resize(std::min<std::size_t>(idx.size(), static_cast<std::size_t>(top_k)));
  return idx;
}

std::vector<int> top_active_cells(const ForwardTrace& trace, int top_k) {
  return top_active_cells(trace.output, top_k);
}

DirectionReport direction_report(const MatrixXd& y_grid, int top_k,
                                 double threshold_scale,
                                 std::optional<double> abs_threshold) {
  DirectionReport rep;
  rep.top_cells = top_active_cells(y_grid, top_k);
  rep.threshold = abs_threshold
                      ? *abs_threshold
                      : threshold_scale * y_grid.cwiseAbs().maxCoeff();
  const Index m = y_grid.cols();
  rep.detected.assign(rep.top_cells.size(),
                      std::vector<bool>(static_cast<std::size_t>(m), false));
  rep.counts.assign(static_cast<std::size_t>(m), 0);
  rep.counts[0] = -1;  // the first word read has no previous activation
  for (Index t = 1; t < m; ++t) {
    int count = 0;
    for (std::size_t r = 0; r < rep.top_cells.size(); ++r) {
      const int cell = rep.top_cells[r];
      const double change =
          std::abs(y_grid(cell, t) - y_grid(cell, t - 1));
      if (change >= rep.threshold) {
        rep.detected[r][static_cast<std::size_t>(t)] = true;
        ++count;
      }
    }
    rep.counts[static_cast<std::size_t>(t)] = count;
  }
  return rep;
}

KeywordReport keyword_report_from_grids(const std::vector<std::string>& words,
                                        const MatrixXd& y_l2r,
                                        const MatrixXd& y_r2l, int top_k,
                                        double threshold_scale,
                                        std::optional<double> abs_threshold) {
  const std::size_t m = words.size();
  if (y_l2r.cols() != static_cast<Index>(m) ||
      y_r2l.cols() != static_cast<Index>(m)) {
    throw DimMismatch("grid width does not match word count");
  }
  if (y_l2r.rows() != y_r2l.rows()) {
    throw DimMismatch("direction grids have different cell counts");
  }

  KeywordReport rep;
  rep.words = words;
  // With fewer cells than requested, every rule uses the achievable count.
  rep.top_k = static_cast<int>(std::min<Index>(top_k, y_l2r.rows()));
  rep.threshold_scale = abs_threshold ? 0.0 : threshold_scale;
  rep.l2r = direction_report(y_l2r, rep.top_k, threshold_scale, abs_threshold);
  rep.r2l = direction_report(y_r2l, rep.top_k, threshold_scale, abs_threshold);

  rep.count_l2r.assign(m, -1);
  rep.count_r2l.assign(m, -1);
  for (std::size_t p = 0; p < m; ++p) {
    rep.count_l2r[p] = rep.l2r.counts[p];
    rep.count_r2l[p] = rep.r2l.counts[m - 1 - p];
  }

  const double bar = 0.4 * static_cast<double>(rep.top_k);
  rep.keyword.assign(m, false);
  for (std::size_t p = 0; p < m; ++p) {
    const bool has_l2r = rep.count_l2r[p] >= 0;
    const bool has_r2l = rep.count_r2l[p] >= 0;
    if (has_l2r && has_r2l) {
      rep.keyword[p] = rep.count_l2r[p] > bar && rep.count_r2l[p] > bar;
    } else if (has_l2r) {
      rep.keyword[p] = rep.count_l2r[p] > bar;
    } else if (has_r2l) {
      rep.keyword[p] = rep.count_r2l[p] > bar;
    }
  }
  return rep;
}

KeywordReport keyword_counts(std::string_view sentence, const AnyModel& model,
                             const TrigramDict& dict, int top_k,
                             double threshold_scale,
                             std::optional<double> abs_threshold) {
  const bool bidi =
      std::visit([](const auto& m) { return m.bidirectional(); }, model);
  if (!bidi) {
    throw DimMismatch("keyword analysis requires a bidirectional model");
  }
  const auto tokens = tokenize(sentence);
  if (tokens.empty()) throw EmptySentence();
  const TrigramSequence seq = hash_sentence(sentence, dict);
  const DirectedRun fwd =
      run_direction_any(model, tokens, seq, Direction::kForward);
  const DirectedRun bwd =
      run_direction_any(model, tokens, seq, Direction::kBackward);
  return keyword_report_from_grids(tokens, fwd.trace.output, bwd.trace.output,
                                   top_k, threshold_scale, abs_threshold);
}

TopicCellMap topic_cells(const std::vector<std::string>& queries,
                         const AnyModel& model, const TrigramDict& dict,
                         int top_m, int top_k, double threshold_scale) {
  if (top_m > top_k) throw DataError("top_m must not exceed top_k");
  TopicCellMap map;
  for (const auto& query : queries) {
    const KeywordReport rep =
        keyword_counts(query, model, dict, top_k, threshold_scale);
    for (std::size_t p = 0; p < rep.words.size(); ++p) {
      if (!rep.keyword[p] || p == 0) continue;  // no forward detection at p=0
      for (int r = 0; r < top_m; ++r) {
        if (rep.l2r.detected[static_cast<std::size_t>(r)][p]) {
          map.cell_keywords[rep.l2r.top_cells[static_cast<std::size_t>(r)]]
              .push_back(rep.words[p]);
        }
      }
    }
  }
  return map;
}

void write_grid_csv(const std::filesystem::path& path,
                    const ActivationGrid& grid) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out << "cell";
  for (const auto& w : grid.words) out << ',' << csv_quote(w);
  out << '\n';
  for (Index r = 0; r < grid.values.rows(); ++r) {
    out << r;
    for (Index c = 0; c < grid.values.cols(); ++c) {
      out << ',' << format_double(grid.values(r, c));
    }
    out << '\n';
  }
  if (!out) throw DataError("write failed: " + path.string());
}

ActivationGrid read_grid_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open grid: " + path.string());
  ActivationGrid grid;
  std::string line;
  int lineno = 0;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = csv_split(line, lineno);
    if (lineno == 1) {
      if (fields.empty() || fields[0] != "cell") {
        throw ParseError(lineno, "expected 'cell' header");
      }
      grid.words.assign(fields.begin() + 1, fields.end());
      continue;
    }
    if (fields.size() != grid.words.size() + 1) {
      throw ParseError(lineno, "row width does not match header");
    }
    if (std::to_string(rows.size()) != fields[0]) {
      throw ParseError(lineno, "cell indices must be consecutive from 0");
    }
    std::vector<double> row;
    row.reserve(fields.size() - 1);
    for (std::size_t i = 1; i < fields.size(); ++i) {
      char* end = nullptr;
      const double v = std::strtod(fields[i].c_str(), &end);
      if (end == fields[i].c_str() || *end != '\0') {
        throw ParseError(lineno, "malformed value");
      }
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("grid has no rows: " + path.string());
  grid.values.resize(static_cast<Index>(rows.size()),
                     static_cast<Index>(grid.words.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      grid.values(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
    }
  }
  return grid;
}

void write_grids_json(const std::filesystem::path& path,
                      const std::vector<ActivationGrid>& grids) {
  json j = json::array();
  for (const auto& g : grids) {
    json grid;
    grid["kind"] = grid_kind_name(g.kind);
    grid["words"] = g.words;
    json values = json::array();
    for (Index r = 0; r < g.values.rows(); ++r) {
      json row = json::array();
      for (Index c = 0; c < g.values.cols(); ++c) row.push_back(g.values(r, c));
      values.push_back(std::move(row));
    }
    grid["values"] = std::move(values);
    j.push_back(std::move(grid));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw DataError("write failed: " + path.string());
}

void write_keyword_report_json(const std::filesystem::path& path,
                               const KeywordReport& report) {
  json j;
  j["words"] = report.words;
  j["top_k"] = report.top_k;
  j["threshold_scale"] = report.threshold_scale;
  j["threshold_l2r"] = report.l2r.threshold;
  j["threshold_r2l"] = report.r2l.threshold;
  j["top_cells_l2r"] = report.l2r.top_cells;
  j["top_cells_r2l"] = report.r2l.top_cells;
  j["count_l2r"] = report.count_l2r;
  j["count_r2l"] = report.count_r2l;
  std::vector<int> kw(report.keyword.size());
  for (std::size_t i = 0; i < kw.size(); ++i) kw[i] = report.keyword[i] ? 1 : 0;
  j["keyword"] = kw;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw DataError("write failed: " + path.string());
}

void write_topic_cells_json(const std::filesystem::path& path,
                            const TopicCellMap& map) {
  json j = json::object();
  for (const auto& [cell, words] : map.cell_keywords) {
    j[std::to_string(cell)] = words;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace seqrank
