#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "adadata/monolstm/monolstm.hpp"
#include "adadata/prefixgen/prefixgen.hpp"
#include "adadata/simulmodel/simulmodel.hpp"
#include "adadata/streamdecode/streamdecode.hpp"

namespace adadata::cli {

struct Paths {
    std::filesystem::path train_src, train_tgt;
    std::filesystem::path test_src, test_tgt;
    // Extra reference files for the test set (multi-reference BLEU).
    std::vector<std::filesystem::path> extra_refs;
    std::filesystem::path src_vocab, tgt_vocab;
    std::filesystem::path mono_checkpoint;
    // Optional; the sweep trains the full-sentence model when unset.
    std::filesystem::path full_checkpoint;
};

/// Everything a pipeline run needs. Loaded from a JSON file; individual
/// command-line flags override fields afterwards.
struct RunConfig {
    Paths paths;
    std::size_t max_length = 100;
    mono::MonoLstmConfig mono;
    simul::SimulConfig simul;
    prefix::GenerationConfig generation;
    stream::DecodeCaps caps;
    std::vector<double> thresholds{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
    bool finetune = false;
    // Score de-BPE'd hypotheses (on) or raw subword tokens (off).
    bool detok_for_bleu = false;

    static RunConfig from_json(const std::string &text);
    static RunConfig load(const std::filesystem::path &path);
    std::string to_json() const;
    // Throws InputError if any listed path is unset or missing.
    void require(std::initializer_list<const std::filesystem::path *> files) const;
    void validate() const;
};

} // namespace adadata::cli
