#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adadata/simulmodel/simulmodel.hpp"

namespace adadata::stream {

enum class Action { Read, Write };

struct TraceStep {
    Action action = Action::Read;
    int token = -1; // target id for writes
};

/// Ordered READ / WRITE actions of one sentence.
class DecodeTrace {
  public:
    void read() { steps_.push_back({Action::Read, -1}); }
    void write(int token) { steps_.push_back({Action::Write, token}); }

    const std::vector<TraceStep> &steps() const { return steps_; }
    std::size_t reads() const;
    std::size_t writes() const;
    // g(t) for t = 1..writes(): READs preceding the t-th WRITE.
    std::vector<std::size_t> delays() const;
    std::vector<int> written() const;

    // Throws ContractError unless READs == source_len and every WRITE follows a READ.
    void validate(std::size_t source_len) const;

  private:
    std::vector<TraceStep> steps_;
};

struct DecodeCaps {
    std::size_t per_read = 20;
    // Total target tokens are capped at global_factor * reads + global_offset.
    std::size_t global_factor = 2;
    std::size_t global_offset = 10;

    std::size_t global(std::size_t reads) const { return global_factor * reads + global_offset; }
};

struct DecodeResult {
    std::vector<int> tokens;
    DecodeTrace trace;
    bool truncated = false; // some cap stopped generation
};

// Recompute rebuilds the decoder state of the committed prefix against the
// grown source on every call. Carry keeps the state from earlier calls.
enum class StateMode { Recompute, Carry };

/// Streaming adaptive policy: after every READ, decode from the committed
/// prefix until <eos>, committing everything generated before it.
class AdaptiveDecoder {
  public:
    explicit AdaptiveDecoder(const simul::SimulModel &model, DecodeCaps caps = {},
                             StateMode mode = StateMode::Recompute);

    void read(int token);
    // End of stream: one last continuation over the complete source.
    void finish();

    bool finished() const { return finished_; }
    const std::vector<int> &committed() const { return committed_; }
    const DecodeTrace &trace() const { return trace_; }
    DecodeResult result() const;

  private:
    void extend(std::size_t cap, bool final_call);

    const simul::SimulModel *model_;
    DecodeCaps caps_;
    StateMode mode_;
    simul::SimulModel::SourceStream source_;
    std::optional<simul::SimulModel::CarriedDecoder> carried_;
    std::vector<int> committed_;
    DecodeTrace trace_;
    bool finished_ = false;
    bool truncated_ = false;
};

DecodeResult adaptive_decode(const simul::SimulModel &model, std::span<const int> source, DecodeCaps caps = {},
                             StateMode mode = StateMode::Recompute);

/// Test-time wait-k: before target token t, min(k + t - 1, S) source tokens
/// have been read. <eos> is suppressed until the whole source is read.
DecodeResult waitk_decode(const simul::SimulModel &model, std::span<const int> source, std::size_t k,
                          DecodeCaps caps = {});

// Full-sentence baseline: S READs, then greedy decoding.
DecodeResult full_decode(const simul::SimulModel &model, std::span<const int> source, DecodeCaps caps = {});

// Trace file: "# adadata-trace v1", then per sentence one line per action
// ("R" or "W <token>") and a blank line after each sentence.
std::string format_traces(std::span<const DecodeTrace> traces, const std::function<std::string(int)> &token_text);
void write_traces(const std::filesystem::path &path, std::span<const DecodeTrace> traces,
                  const std::function<std::string(int)> &token_text);

struct ParsedTrace {
    std::size_t reads = 0;
    std::vector<std::size_t> delays;
    std::vector<std::string> tokens;
};

std::vector<ParsedTrace> parse_traces(std::string_view contents);
std::vector<ParsedTrace> read_traces(const std::filesystem::path &path);

} // namespace adadata::stream
