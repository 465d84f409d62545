#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "run_config.hpp"

namespace adadata::cli {

struct SweepRow {
    std::string label; // threshold as written in the CSV, or "full"
    double al = 0.0;
    double bleu = 0.0;
    double seconds = 0.0; // training wall-clock; NaN when nothing was trained
    std::string error;    // non-empty for a failed threshold
};

/// For every threshold: generate prefixes with the MonoLSTM, train the
/// simultaneous model on the 1:1 mix (or fine-tune the full-sentence model
/// for one epoch), decode the test set adaptively and score it. A final row
/// labelled "full" scores the full-sentence model with full decoding.
/// Artifacts go to out_dir/e<threshold>/ and out_dir/full/.
std::vector<SweepRow> run_sweep(const RunConfig &config, const std::filesystem::path &out_dir, std::ostream &log);

std::string format_threshold(double e);
// Header "e,al,bleu,seconds".
std::string format_sweep_csv(const std::vector<SweepRow> &rows);
std::vector<SweepRow> parse_sweep_csv(std::string_view contents);

} // namespace adadata::cli
