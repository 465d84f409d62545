#include "sweep.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "adadata/error.hpp"
#include "adadata/numerics/checkpoint.hpp"
#include "pipeline.hpp"

namespace adadata::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Scored {
    double al = 0.0;
    double bleu = 0.0;
};

Scored decode_and_score(const simul::SimulModel &model, const Vocabs &vocabs, const RunConfig &config,
                        const std::vector<std::string> &sources,
                        const std::vector<std::vector<std::string>> &references, const Policy &policy,
                        const std::filesystem::path &dir) {
    const auto decoded = decode_lines(model, vocabs, sources, policy, config.caps);
    std::vector<std::string> hyps;
    for (const auto &h : decoded.hypotheses) hyps.push_back(hypothesis_text(h, config.detok_for_bleu));
    write_lines(dir / "hyp.txt", hyps);
    const auto trace_text =
        stream::format_traces(decoded.traces, [&](int id) { return vocabs.tgt.token(id); });
    num::write_file_atomic(dir / "trace.txt", trace_text);
    const auto parsed = stream::parse_traces(trace_text);
    const auto report = evaluate_lines(hyps, references, &parsed);
    num::write_file_atomic(dir / "report.txt", report.format());
    return {report.latency.mean(), report.bleu.bleu};
}

} // namespace

std::string format_threshold(double e) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", e);
    return buf;
}

std::vector<SweepRow> run_sweep(const RunConfig &config, const std::filesystem::path &out_dir, std::ostream &log) {
    config.validate();
    const auto &p = config.paths;
    config.require({&p.train_src, &p.train_tgt, &p.test_src, &p.test_tgt, &p.src_vocab, &p.tgt_vocab,
                    &p.mono_checkpoint});
    for (const auto &r : p.extra_refs) config.require({&r});
    if (!p.full_checkpoint.empty()) config.require({&p.full_checkpoint});
    if (config.thresholds.empty()) throw ParameterError("sweep: no thresholds requested");

    std::filesystem::create_directories(out_dir);
    num::write_file_atomic(out_dir / "config.json", config.to_json());

    const Vocabs vocabs = load_vocabs(config);
    const auto corpus = load_corpus(p.train_src, p.train_tgt, vocabs, config.max_length);
    const auto sources = text::read_lines(p.test_src);
    std::vector<std::vector<std::string>> references{text::read_lines(p.test_tgt)};
    for (const auto &r : p.extra_refs) references.push_back(text::read_lines(r));

    const auto mono_model = mono::model_from_checkpoint(num::read_checkpoint(p.mono_checkpoint));
    if (vocabs_of(num::read_checkpoint(p.mono_checkpoint)).src != vocabs.src)
        throw CompatibilityError("sweep: the MonoLSTM checkpoint was trained with a different source vocabulary");

    const auto epoch_logger = [&](const char *tag) {
        return [&log, tag](const num::EpochLog &l) { log << tag << ' ' << log_line(l) << '\n' << std::flush; };
    };

    // Full-sentence model: loaded or trained once, shared by the --finetune path.
    std::filesystem::create_directories(out_dir / "full");
    double full_seconds = std::nan("");
    auto full_model = [&] {
        if (!p.full_checkpoint.empty()) return simul::model_from_checkpoint(num::read_checkpoint(p.full_checkpoint));
        log << "training full-sentence model\n";
        const auto start = Clock::now();
        auto m = simul::train_full_sentence(corpus, vocabs.src.size(), vocabs.tgt.size(), config.simul,
                                            epoch_logger("full"));
        full_seconds = seconds_since(start);
        num::write_checkpoint(out_dir / "full" / "model.ckpt", simul::to_checkpoint(m, vocabs.src, vocabs.tgt));
        return m;
    }();

    std::vector<SweepRow> rows;
    for (double e : config.thresholds) {
        SweepRow row;
        row.label = format_threshold(e);
        const auto dir = out_dir / ("e" + row.label);
        try {
            std::filesystem::create_directories(dir);
            prefix::GenerationConfig gen = config.generation;
            gen.threshold = e;
            const auto prefixes = prefix::generate_corpus_prefixes(corpus, mono_model, gen);
            prefix::write_prefix_file(dir / "prefixes.tsv", e, prefixes);
            log << "e=" << row.label << " prefixes=" << prefixes.size() << '\n';

            const auto start = Clock::now();
            const std::string tag = "e=" + row.label;
            auto model = config.finetune
                             ? simul::finetune(full_model, corpus, prefixes, config.simul, epoch_logger(tag.c_str()))
                             : simul::train_mixed(corpus, prefixes, vocabs.src.size(), vocabs.tgt.size(),
                                                  config.simul, epoch_logger(tag.c_str()));
            row.seconds = seconds_since(start);
            num::write_checkpoint(dir / "model.ckpt", simul::to_checkpoint(model, vocabs.src, vocabs.tgt));
            const auto s = decode_and_score(model, vocabs, config, sources, references, Policy{}, dir);
            row.al = s.al;
            row.bleu = s.bleu;
        } catch (const std::exception &ex) {
            row.al = row.bleu = row.seconds = std::nan("");
            row.error = ex.what();
            log << "e=" << row.label << " failed: " << ex.what() << '\n';
        }
        rows.push_back(row);
    }

    SweepRow full{"full", 0.0, 0.0, full_seconds, {}};
    const auto s = decode_and_score(full_model, vocabs, config, sources, references,
                                    Policy{Policy::Kind::Full, 0}, out_dir / "full");
    full.al = s.al;
    full.bleu = s.bleu;
    rows.push_back(full);
    return rows;
}

std::string format_sweep_csv(const std::vector<SweepRow> &rows) {
    std::string out = "e,al,bleu,seconds\n";
    char buf[160];
    for (const auto &r : rows) {
        std::snprintf(buf, sizeof buf, "%s,%.4f,%.4f,%.3f\n", r.label.c_str(), r.al, r.bleu, r.seconds);
        out += buf;
    }
    return out;
}

std::vector<SweepRow> parse_sweep_csv(std::string_view contents) {
    std::istringstream in{std::string(contents)};
    std::string line;
    if (!std::getline(in, line) || line != "e,al,bleu,seconds")
        throw InputError("sweep CSV: expected header 'e,al,bleu,seconds'");
    std::vector<SweepRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 4) throw InputError("sweep CSV: malformed row '" + line + "'");
        SweepRow r;
        r.label = f[0];
        try {
            r.al = std::stod(f[1]);
            r.bleu = std::stod(f[2]);
            r.seconds = std::stod(f[3]);
        } catch (const std::exception &) {
            throw InputError("sweep CSV: non-numeric field in '" + line + "'");
        }
        if (std::isnan(r.al) || std::isnan(r.bleu)) r.error = "failed";
        rows.push_back(r);
    }
    return rows;
}

} // namespace adadata::cli
