#pragma once

// Model introspection: per-word activation grids, most-active cells, and the
// keyword / topic-cell analyses built on them.
//
// Keyword rule. For one reading direction, take the top_k cells ranked by
// |y(m)| (ties to the lower index). A cell "detects" the word at reading
// position t >= 2 when |y_cell(t) - y_cell(t-1)| >= threshold, where the
// threshold defaults to `threshold_scale` times the largest |y| in that
// direction's grid. The first word of a direction has no detection count. A
// word is a keyword when its count is strictly greater than 0.4 * top_k in
// both reading directions; the sentence's first and last word, which carry a
// count in only one direction, use that single direction.

#include <filesystem>
#include <optional>
#include <map>
#include <string>
#include <vector>

#include "seqrank/model.hpp"
#include "seqrank/texthash.hpp"

namespace seqrank {

enum class GridKind { kGateI, kGateF, kGateO, kCell, kOutput };
enum class Direction { kForward, kBackward };

const char* grid_kind_name(GridKind k);

struct ActivationGrid {
  GridKind kind = GridKind::kOutput;
  std::vector<std::string> words;  // column labels, reading order
  MatrixXd values;                 // cells x words
};

// Grids for one sentence under one reading direction of the model. LSTM
// models yield i, f, o, c, y (f is all ones for the reduced variant); RNN
// models yield only y. Direction::kBackward uses the model's backward
// parameters on the reversed word order and is only valid for bidirectional
// models; its word labels appear in reading order (last word first).
std::vector<ActivationGrid> dump_activations(std::string_view sentence,
                                             const AnyModel& model,
                                             const TrigramDict& dict,
                                             Direction dir = Direction::kForward);

// Indices of the top_k cells by |y(m)|, descending, ties to the lower index.
std::vector<int> top_active_cells(const ForwardTrace& trace, int top_k);
std::vector<int> top_active_cells(const MatrixXd& y_grid, int top_k);

// Detection results for one reading direction, computed purely from a y-grid.
struct DirectionReport {
  std::vector<int> top_cells;              // ranked, size top_k
  double threshold = 0.0;                  // absolute change threshold used
  std::vector<std::vector<bool>> detected; // [rank][reading position]
  std::vector<int> counts;                 // per reading position; -1 at 0
};

DirectionReport direction_report(const MatrixXd& y_grid, int top_k,
                                 double threshold_scale,
                                 std::optional<double> abs_threshold);

struct KeywordReport {
  std::vector<std::string> words;  // original sentence order
  int top_k = 10;
  double threshold_scale = 0.2;    // 0 when an absolute threshold was forced
  DirectionReport l2r;             // reading positions = original positions
  DirectionReport r2l;             // reading positions reverse the sentence
  std::vector<int> count_l2r;      // per original word; -1 where undefined
  std::vector<int> count_r2l;      // per original word; -1 where undefined
  std::vector<bool> keyword;       // per original word
};

// Requires a bidirectional model (both reading directions are needed).
KeywordReport keyword_counts(std::string_view sentence, const AnyModel& model,
                             const TrigramDict& dict, int top_k = 10,
                             double threshold_scale = 0.2,
                             std::optional<double> abs_threshold = std::nullopt);

// Same computation from exported y-grids alone: y_l2r columns follow the
// sentence, y_r2l columns follow the reversed sentence.
KeywordReport keyword_report_from_grids(const std::vector<std::string>& words,
                                        const MatrixXd& y_l2r,
                                        const MatrixXd& y_r2l, int top_k,
                                        double threshold_scale,
                                        std::optional<double> abs_threshold);

// For each query: its keywords (rule above) are attributed to those of the
// forward direction's top_m active cells that detected them in the forward
// reading. Aggregated over all queries into cell -> keyword occurrences.
struct TopicCellMap {
  std::map<int, std::vector<std::string>> cell_keywords;
};

TopicCellMap topic_cells(const std::vector<std::string>& queries,
                         const AnyModel& model, const TrigramDict& dict,
                         int top_m = 5, int top_k = 10,
                         double threshold_scale = 0.2);

// ---------------------------------------------------------------------------
// Export formats. Grid CSV: header "cell,<word>,..." then one row per cell
// "index,v1,v2,..."; values print round-trippably; labels are quoted when
// needed. JSON mirrors the structs.
// ---------------------------------------------------------------------------
void write_grid_csv(const std::filesystem::path& path,
                    const ActivationGrid& grid);
ActivationGrid read_grid_csv(const std::filesystem::path& path);

void write_grids_json(const std::filesystem::path& path,
                      const std::vector<ActivationGrid>& grids);
void write_keyword_report_json(const std::filesystem::path& path,
                               const KeywordReport& report);
void write_topic_cells_json(const std::filesystem::path& path,
                            const TopicCellMap& map);

}  // namespace seqrank
