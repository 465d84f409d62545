#include "commands.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <optional>
#include <ostream>

#include "adadata/error.hpp"
#include "adadata/numerics/checkpoint.hpp"
#include "adadata/textio/bpe.hpp"
#include "adadata/textio/toy.hpp"
#include "pipeline.hpp"
#include "sweep.hpp"

namespace adadata::cli {

namespace {

namespace fs = std::filesystem;

// Flags shared by every command that reads a run configuration.
struct ConfigFlags {
    std::string config;
    std::string train_src, train_tgt, test_src, test_tgt, src_vocab, tgt_vocab;
    std::optional<std::size_t> epochs, max_tokens;
    std::optional<std::uint64_t> seed;
    std::optional<double> lr;

    void add_paths(CLI::App &app) {
        app.add_option("--config", config, "JSON run configuration");
        app.add_option("--train-src", train_src, "training source file (overrides paths.train_src)");
        app.add_option("--train-tgt", train_tgt, "training target file (overrides paths.train_tgt)");
        app.add_option("--src-vocab", src_vocab, "source vocabulary (overrides paths.src_vocab)");
        app.add_option("--tgt-vocab", tgt_vocab, "target vocabulary (overrides paths.tgt_vocab)");
    }
    void add_test_paths(CLI::App &app) {
        app.add_option("--test-src", test_src, "test source file (overrides paths.test_src)");
        app.add_option("--test-tgt", test_tgt, "test reference file (overrides paths.test_tgt)");
    }
    void add_training(CLI::App &app) {
        app.add_option("--epochs", epochs, "number of epochs");
        app.add_option("--max-tokens", max_tokens, "batch budget in padded tokens");
        app.add_option("--seed", seed, "random seed");
        app.add_option("--lr", lr, "peak learning rate");
    }

    RunConfig load() const {
        RunConfig c = config.empty() ? RunConfig{} : RunConfig::load(config);
        auto set = [](fs::path &dst, const std::string &v) {
            if (!v.empty()) dst = v;
        };
        set(c.paths.train_src, train_src);
        set(c.paths.train_tgt, train_tgt);
        set(c.paths.test_src, test_src);
        set(c.paths.test_tgt, test_tgt);
        set(c.paths.src_vocab, src_vocab);
        set(c.paths.tgt_vocab, tgt_vocab);
        return c;
    }
    template <class Cfg>
    void override_training(Cfg &c) const {
        if (epochs) c.epochs = *epochs;
        if (max_tokens) c.max_tokens = *max_tokens;
        if (seed) c.seed = *seed;
        if (lr) c.adam.lr = *lr;
        c.validate();
    }
};

fs::path sibling(const fs::path &path, const std::string &suffix) {
    fs::path p = path;
    p += suffix;
    return p;
}

// Streams epoch lines to `out` and to the log file.
class TrainingLog {
  public:
    TrainingLog(const fs::path &path, std::ostream &out) : file_(path, std::ios::trunc), out_(out) {
        if (!file_) throw InputError("cannot open log file " + path.string());
    }
    num::EpochCallback callback() {
        return [this](const num::EpochLog &l) {
            const auto line = log_line(l);
            out_ << line << '\n' << std::flush;
            file_ << line << '\n' << std::flush;
        };
    }

  private:
    std::ofstream file_;
    std::ostream &out_;
};

std::vector<std::vector<std::string>> tokenized(const std::vector<std::string> &lines) {
    std::vector<std::vector<std::string>> out;
    out.reserve(lines.size());
    for (const auto &l : lines) out.push_back(text::split_whitespace(l));
    return out;
}

void write_effective_config(const fs::path &out, const RunConfig &config) {
    num::write_file_atomic(sibling(out, ".config.json"), config.to_json());
}

} // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"adadata: adaptive simultaneous translation toolkit"};
    app.require_subcommand(1);
    std::function<void()> action;

    // make-toy
    text::ToyOptions toy;
    std::string toy_dir;
    auto *make_toy = app.add_subcommand("make-toy", "write the synthetic toy parallel corpus");
    make_toy->add_option("--out-dir", toy_dir, "output directory")->required();
    make_toy->add_option("--train", toy.train_pairs, "training pairs");
    make_toy->add_option("--test", toy.test_pairs, "test pairs");
    make_toy->add_option("--seed", toy.seed, "random seed");
    make_toy->callback([&] {
        action = [&] {
            const auto c = text::make_toy_corpus(toy);
            fs::create_directories(toy_dir);
            write_lines(fs::path(toy_dir) / "train.src", c.train_source);
            write_lines(fs::path(toy_dir) / "train.tgt", c.train_target);
            write_lines(fs::path(toy_dir) / "test.src", c.test_source);
            write_lines(fs::path(toy_dir) / "test.tgt", c.test_target);
        };
    });

    // bpe-learn / bpe-apply / detok
    std::vector<std::string> inputs;
    std::string output, model_path;
    std::size_t merges = 0;
    auto *bpe_learn = app.add_subcommand("bpe-learn", "learn BPE merges");
    bpe_learn->add_option("--input", inputs, "training text files")->required();
    bpe_learn->add_option("--merges", merges, "number of merges")->required();
    bpe_learn->add_option("--out", output, "model file")->required();
    bpe_learn->callback([&] {
        action = [&] {
            std::vector<std::string> lines;
            for (const auto &f : inputs) {
                auto l = text::read_lines(f);
                lines.insert(lines.end(), l.begin(), l.end());
            }
            text::learn_bpe(lines, merges).save(output);
        };
    });

    std::string input;
    auto *bpe_apply = app.add_subcommand("bpe-apply", "segment a text file into subwords");
    bpe_apply->add_option("--model", model_path, "BPE model file")->required();
    bpe_apply->add_option("--input", input, "text file")->required();
    bpe_apply->add_option("--out", output, "output file")->required();
    bpe_apply->callback([&] {
        action = [&] {
            const auto model = text::BpeModel::load(model_path);
            std::vector<std::string> lines;
            for (const auto &l : text::read_lines(input)) lines.push_back(hypothesis_text(text::apply_bpe(l, model), false));
            write_lines(output, lines);
        };
    });

    auto *detok = app.add_subcommand("detok", "undo BPE segmentation");
    detok->add_option("--input", input, "subword file")->required();
    detok->add_option("--out", output, "output file")->required();
    detok->callback([&] {
        action = [&] {
            std::vector<std::string> lines;
            for (const auto &l : text::read_lines(input)) lines.push_back(text::detokenize(text::split_whitespace(l)));
            write_lines(output, lines);
        };
    });

    // vocab-build
    std::size_t min_freq = 1;
    auto *vocab_build = app.add_subcommand("vocab-build", "build a token vocabulary");
    vocab_build->add_option("--input", inputs, "tokenized text files")->required();
    vocab_build->add_option("--out", output, "vocabulary file")->required();
    vocab_build->add_option("--min-freq", min_freq, "minimum token count");
    vocab_build->callback([&] {
        action = [&] {
            std::vector<std::vector<std::string>> corpus;
            for (const auto &f : inputs) {
                auto t = tokenized(text::read_lines(f));
                corpus.insert(corpus.end(), t.begin(), t.end());
            }
            text::build_vocab(corpus, min_freq).save(output);
        };
    });

    // Training commands.
    ConfigFlags flags;
    std::string prefixes_path, base_path, eval_src, eval_tgt;
    auto *train_mono = app.add_subcommand("train-mono", "train the attention-measurement MonoLSTM");
    auto *pretrain = app.add_subcommand("pretrain-full", "train the translation model on full sentences");
    auto *train_simul = app.add_subcommand("train-simul", "train the translation model on a 1:1 prefix mix");
    auto *ft = app.add_subcommand("finetune", "fine-tune a full-sentence model for one epoch on a 1:1 prefix mix");
    for (auto *sub : {train_mono, pretrain, train_simul, ft}) {
        flags.add_paths(*sub);
        flags.add_training(*sub);
        sub->add_option("--out", output, "checkpoint file")->required();
    }
    train_mono->add_option("--eval-src", eval_src, "held-out source for teacher-forced accuracy");
    train_mono->add_option("--eval-tgt", eval_tgt, "held-out target for teacher-forced accuracy");
    train_simul->add_option("--prefixes", prefixes_path, "prefix file from gen-prefixes")->required();
    ft->add_option("--prefixes", prefixes_path, "prefix file from gen-prefixes")->required();
    ft->add_option("--base", base_path, "full-sentence checkpoint")->required();

    train_mono->callback([&] {
        action = [&] {
            RunConfig c = flags.load();
            flags.override_training(c.mono);
            c.require({&c.paths.train_src, &c.paths.train_tgt});
            if (!eval_src.empty() || !eval_tgt.empty()) {
                const fs::path es = eval_src, et = eval_tgt;
                c.require({&es, &et});
            }
            const auto vocabs = load_vocabs(c);
            const auto corpus = load_corpus(c.paths.train_src, c.paths.train_tgt, vocabs, c.max_length);
            write_effective_config(output, c);
            TrainingLog log(sibling(output, ".log"), out);
            const auto model = mono::train_monolstm(corpus, vocabs.src.size(), vocabs.tgt.size(), c.mono, log.callback());
            num::write_checkpoint(output, mono::to_checkpoint(model, vocabs.src, vocabs.tgt));
            if (!eval_src.empty()) {
                const auto held = load_corpus(eval_src, eval_tgt, vocabs, c.max_length);
                out << "teacher_forced_accuracy=" << model.teacher_forced_accuracy(held).accuracy() << '\n';
            }
        };
    });

    pretrain->callback([&] {
        action = [&] {
            RunConfig c = flags.load();
            flags.override_training(c.simul);
            c.require({&c.paths.train_src, &c.paths.train_tgt});
            const auto vocabs = load_vocabs(c);
            const auto corpus = load_corpus(c.paths.train_src, c.paths.train_tgt, vocabs, c.max_length);
            write_effective_config(output, c);
            TrainingLog log(sibling(output, ".log"), out);
            const auto model =
                simul::train_full_sentence(corpus, vocabs.src.size(), vocabs.tgt.size(), c.simul, log.callback());
            num::write_checkpoint(output, simul::to_checkpoint(model, vocabs.src, vocabs.tgt));
        };
    });

    train_simul->callback([&] {
        action = [&] {
            RunConfig c = flags.load();
            flags.override_training(c.simul);
            const fs::path pp = prefixes_path;
            c.require({&c.paths.train_src, &c.paths.train_tgt, &pp});
            const auto vocabs = load_vocabs(c);
            const auto corpus = load_corpus(c.paths.train_src, c.paths.train_tgt, vocabs, c.max_length);
            const auto prefixes = prefix::read_prefix_file(pp).pairs;
            write_effective_config(output, c);
            TrainingLog log(sibling(output, ".log"), out);
            const auto model =
                simul::train_mixed(corpus, prefixes, vocabs.src.size(), vocabs.tgt.size(), c.simul, log.callback());
            num::write_checkpoint(output, simul::to_checkpoint(model, vocabs.src, vocabs.tgt));
        };
    });

    ft->callback([&] {
        action = [&] {
            RunConfig c = flags.load();
            const fs::path pp = prefixes_path, bp = base_path;
            c.require({&c.paths.train_src, &c.paths.train_tgt, &pp, &bp});
            const auto ckpt = num::read_checkpoint(bp);
            const auto base = simul::model_from_checkpoint(ckpt);
            // Without a config file the base model's own settings apply.
            if (flags.config.empty()) c.simul = base.config();
            flags.override_training(c.simul);
            const auto vocabs = vocabs_of(ckpt);
            const auto corpus = load_corpus(c.paths.train_src, c.paths.train_tgt, vocabs, c.max_length);
            const auto prefixes = prefix::read_prefix_file(pp).pairs;
            write_effective_config(output, c);
            TrainingLog log(sibling(output, ".log"), out);
            const auto model = simul::finetune(base, corpus, prefixes, c.simul, log.callback());
            num::write_checkpoint(output, simul::to_checkpoint(model, vocabs.src, vocabs.tgt));
        };
    });

    // gen-prefixes
    std::optional<double> threshold;
    bool keep_empty = false;
    auto *gen = app.add_subcommand("gen-prefixes", "extract prefix pairs from MonoLSTM attention");
    flags.add_paths(*gen);
    gen->add_option("--model", model_path, "MonoLSTM checkpoint")->required();
    gen->add_option("--threshold,-e", threshold, "cumulative attention threshold e");
    gen->add_flag("--keep-empty", keep_empty, "keep prefixes with an empty target");
    gen->add_option("--out", output, "prefix file")->required();
    gen->callback([&] {
        action = [&] {
            RunConfig c = flags.load();
            if (threshold) c.generation.threshold = *threshold;
            if (keep_empty) c.generation.drop_empty_target = false;
            c.generation.validate();
            const fs::path mp = model_path;
            c.require({&c.paths.train_src, &c.paths.train_tgt, &mp});
            const auto ckpt = num::read_checkpoint(mp);
            const auto model = mono::model_from_checkpoint(ckpt);
            const auto corpus = load_corpus(c.paths.train_src, c.paths.train_tgt, vocabs_of(ckpt), c.max_length);
            const auto pairs = prefix::generate_corpus_prefixes(corpus, model, c.generation);
            prefix::write_prefix_file(output, c.generation.threshold, pairs);
        };
    });

    // decode
    std::string policy_text = "adaptive", trace_path;
    bool detok_out = false;
    auto *decode = app.add_subcommand("decode", "translate a source file under a read/write policy");
    decode->add_option("--model", model_path, "translation checkpoint")->required();
    decode->add_option("--policy", policy_text, "adaptive | adaptive-carry | full | waitk:<k>");
    decode->add_option("--input", input, "source file, one tokenized sentence per line")->required();
    decode->add_option("--out", output, "hypothesis file")->required();
    decode->add_option("--trace", trace_path, "trace file (default: <out>.trace)");
    decode->add_flag("--detok", detok_out, "write de-BPE'd hypotheses");
    decode->callback([&] {
        action = [&] {
            const auto policy = Policy::parse(policy_text);
            const auto ckpt = num::read_checkpoint(model_path);
            const auto model = simul::model_from_checkpoint(ckpt);
            const auto vocabs = vocabs_of(ckpt);
            const auto decoded = decode_lines(model, vocabs, text::read_lines(input), policy, stream::DecodeCaps{});
            std::vector<std::string> hyps;
            for (const auto &h : decoded.hypotheses) hyps.push_back(hypothesis_text(h, detok_out));
            write_lines(output, hyps);
            stream::write_traces(trace_path.empty() ? sibling(output, ".trace") : fs::path(trace_path), decoded.traces,
                                 [&](int id) { return vocabs.tgt.token(id); });
        };
    });

    // evaluate
    std::vector<std::string> refs;
    auto *evaluate = app.add_subcommand("evaluate", "score hypotheses with BLEU and Average Lagging");
    evaluate->add_option("--hyp", input, "hypothesis file")->required();
    evaluate->add_option("--ref", refs, "reference file (repeat for multiple references)")->required();
    evaluate->add_option("--trace", trace_path, "trace file from decode");
    evaluate->add_option("--out", output, "report file (default: stdout only)");
    std::string latency_unit = "subword", eval_source;
    evaluate->add_option("--latency-unit", latency_unit, "measure AL in subwords or words")
        ->check(CLI::IsMember({"subword", "word"}));
    evaluate->add_option("--source", eval_source, "decoded source file, required for --latency-unit word");
    evaluate->callback([&] {
        action = [&] {
            std::vector<std::vector<std::string>> ref_sets;
            for (const auto &r : refs) ref_sets.push_back(text::read_lines(r));
            std::optional<std::vector<stream::ParsedTrace>> traces;
            if (!trace_path.empty()) traces = stream::read_traces(trace_path);
            std::optional<std::vector<std::string>> sources;
            if (latency_unit == "word") {
                if (!traces || eval_source.empty())
                    throw ParameterError("--latency-unit word needs --trace and --source");
                sources = text::read_lines(eval_source);
            }
            const auto report = evaluate_lines(text::read_lines(input), ref_sets, traces ? &*traces : nullptr,
                                               sources ? &*sources : nullptr);
            const auto textual = report.format();
            if (!output.empty()) num::write_file_atomic(output, textual);
            out << textual;
        };
    });

    // sweep
    std::string out_dir, mono_path, full_path;
    std::vector<double> thresholds;
    bool finetune_flag = false;
    auto *sweep = app.add_subcommand("sweep", "threshold sweep: prefixes, training, adaptive decoding, scoring");
    flags.add_paths(*sweep);
    flags.add_test_paths(*sweep);
    flags.add_training(*sweep);
    sweep->add_option("--mono", mono_path, "MonoLSTM checkpoint (overrides paths.mono_checkpoint)");
    sweep->add_option("--full", full_path, "full-sentence checkpoint (overrides paths.full_checkpoint)");
    sweep->add_option("--thresholds", thresholds, "thresholds, strictly increasing")->delimiter(',');
    sweep->add_flag("--finetune", finetune_flag, "fine-tune the full-sentence model instead of training from scratch");
    sweep->add_option("--out-dir", out_dir, "output directory")->required();
    sweep->callback([&] {
        action = [&] {
            RunConfig c = flags.load();
            flags.override_training(c.simul);
            if (!mono_path.empty()) c.paths.mono_checkpoint = mono_path;
            if (!full_path.empty()) c.paths.full_checkpoint = full_path;
            if (!thresholds.empty()) c.thresholds = thresholds;
            if (finetune_flag) c.finetune = true;
            const auto rows = run_sweep(c, out_dir, out);
            const auto csv = format_sweep_csv(rows);
            num::write_file_atomic(fs::path(out_dir) / "sweep.csv", csv);
            out << csv;
        };
    });

    std::vector<const char *> argv{"adadata"};
    for (const auto &a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp &) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp &) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError &e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }

    try {
        if (action) action();
        return kOk;
    } catch (const ParameterError &e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const InputError &e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const TrainingError &e) {
        err << "error: training failed: " << e.what() << '\n';
        return kTrainingFailure;
    } catch (const fs::filesystem_error &e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << '\n';
        return kTrainingFailure;
    }
}

} // namespace adadata::cli
