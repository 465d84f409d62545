#include "adadata/streamdecode/streamdecode.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "adadata/error.hpp"
#include "adadata/numerics/checkpoint.hpp"

namespace adadata::stream {

std::size_t DecodeTrace::reads() const {
    return static_cast<std::size_t>(
        std::count_if(steps_.begin(), steps_.end(), [](const TraceStep &s) { return s.action == Action::Read; }));
}

std::size_t DecodeTrace::writes() const { return steps_.size() - reads(); }

std::vector<std::size_t> DecodeTrace::delays() const {
    std::vector<std::size_t> g;
    std::size_t r = 0;
    for (const auto &s : steps_) {
        if (s.action == Action::Read)
            ++r;
        else
            g.push_back(r);
    }
    return g;
}

std::vector<int> DecodeTrace::written() const {
    std::vector<int> out;
    for (const auto &s : steps_)
        if (s.action == Action::Write) out.push_back(s.token);
    return out;
}

void DecodeTrace::validate(std::size_t source_len) const {
    if (reads() != source_len)
        throw ContractError("trace has " + std::to_string(reads()) + " READs for a source of length " +
                            std::to_string(source_len));
    if (!steps_.empty() && steps_.front().action == Action::Write)
        throw ContractError("trace writes before the first READ");
}

AdaptiveDecoder::AdaptiveDecoder(const simul::SimulModel &model, DecodeCaps caps, StateMode mode)
    : model_(&model), caps_(caps), mode_(mode), source_(model) {
    if (mode_ == StateMode::Carry) carried_.emplace(model);
}

void AdaptiveDecoder::extend(std::size_t cap, bool final_call) {
    const std::size_t budget = caps_.global(source_.length());
    const std::size_t room = budget > committed_.size() ? budget - committed_.size() : 0;
    const std::size_t n = final_call ? room : std::min(cap, room);
    if (n == 0) {
        truncated_ = true;
        return;
    }
    auto r = carried_ ? carried_->extend(source_.states(), n, true)
                      : model_->continue_decode(source_.states(), committed_, n, true);
    for (int tok : r.tokens) {
        committed_.push_back(tok);
        trace_.write(tok);
    }
    if (r.capped) truncated_ = true;
}

void AdaptiveDecoder::read(int token) {
    if (finished_) throw ContractError("AdaptiveDecoder: read after end of stream");
    source_.read(token);
    trace_.read();
    extend(caps_.per_read, false);
}

void AdaptiveDecoder::finish() {
    if (finished_) return;
    if (source_.length() == 0) throw ContractError("AdaptiveDecoder: end of stream before any source token");
    finished_ = true;
    extend(0, true);
}

DecodeResult AdaptiveDecoder::result() const {
    if (!finished_) throw ContractError("AdaptiveDecoder: result requested before end of stream");
    return {committed_, trace_, truncated_};
}

DecodeResult adaptive_decode(const simul::SimulModel &model, std::span<const int> source, DecodeCaps caps,
                             StateMode mode) {
    AdaptiveDecoder dec(model, caps, mode);
    for (int tok : source) dec.read(tok);
    dec.finish();
    return dec.result();
}

DecodeResult waitk_decode(const simul::SimulModel &model, std::span<const int> source, std::size_t k,
                          DecodeCaps caps) {
    if (k == 0) throw ParameterError("wait-k: k must be >= 1");
    if (source.empty()) throw InputError("wait-k: empty source");
    const std::size_t S = source.size();
    simul::SimulModel::SourceStream stream(model);
    DecodeResult out;
    auto read_up_to = [&](std::size_t n) {
        while (stream.length() < n) {
            stream.read(source[stream.length()]);
            out.trace.read();
        }
    };
    const std::size_t budget = caps.global(S);
    for (std::size_t t = 1;; ++t) {
        if (out.tokens.size() >= budget) {
            out.truncated = true;
            break;
        }
        read_up_to(std::min(k + t - 1, S));
        auto r = model.continue_decode(stream.states(), out.tokens, 1, stream.length() == S);
        if (r.hit_eos) break;
        out.tokens.push_back(r.tokens.front());
        out.trace.write(r.tokens.front());
    }
    read_up_to(S);
    return out;
}

DecodeResult full_decode(const simul::SimulModel &model, std::span<const int> source, DecodeCaps caps) {
    if (source.empty()) throw InputError("full decode: empty source");
    simul::SimulModel::SourceStream stream(model);
    DecodeResult out;
    for (int tok : source) {
        stream.read(tok);
        out.trace.read();
    }
    auto r = model.continue_decode(stream.states(), {}, caps.global(source.size()), true);
    out.tokens = r.tokens;
    out.truncated = r.capped;
    for (int tok : r.tokens) out.trace.write(tok);
    return out;
}

namespace {
constexpr std::string_view kTraceHeader = "# adadata-trace v1";
}

std::string format_traces(std::span<const DecodeTrace> traces, const std::function<std::string(int)> &token_text) {
    std::string out(kTraceHeader);
    out += '\n';
    for (const auto &trace : traces) {
        for (const auto &s : trace.steps()) {
            if (s.action == Action::Read)
                out += "R\n";
            else
                out += "W " + token_text(s.token) + "\n";
        }
        out += '\n';
    }
    return out;
}

void write_traces(const std::filesystem::path &path, std::span<const DecodeTrace> traces,
                  const std::function<std::string(int)> &token_text) {
    num::write_file_atomic(path, format_traces(traces, token_text));
}

std::vector<ParsedTrace> parse_traces(std::string_view contents) {
    std::istringstream in{std::string(contents)};
    std::string line;
    if (!std::getline(in, line) || line != kTraceHeader)
        throw CompatibilityError("trace file: expected header '" + std::string(kTraceHeader) + "'");
    std::vector<ParsedTrace> out;
    ParsedTrace cur;
    bool open = false;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) {
            if (open) out.push_back(std::move(cur));
            cur = {};
            open = false;
            continue;
        }
        open = true;
        if (line == "R") {
            ++cur.reads;
        } else if (line.size() > 2 && line.compare(0, 2, "W ") == 0) {
            if (cur.reads == 0) throw InputError("trace file: WRITE before any READ at line " + std::to_string(lineno));
            cur.delays.push_back(cur.reads);
            cur.tokens.push_back(line.substr(2));
        } else {
            throw InputError("trace file: malformed line " + std::to_string(lineno) + ": '" + line + "'");
        }
    }
    if (open) out.push_back(std::move(cur));
    return out;
}

std::vector<ParsedTrace> read_traces(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open trace file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_traces(ss.str());
}

} // namespace adadata::stream
