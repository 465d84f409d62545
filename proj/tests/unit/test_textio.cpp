#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "adadata/error.hpp"
#include "adadata/textio/bpe.hpp"
#include "adadata/textio/corpus.hpp"
#include "adadata/textio/toy.hpp"
#include "adadata/textio/vocab.hpp"

using namespace adadata;
using namespace adadata::text;

namespace {

std::filesystem::path temp_dir(const std::string &name) {
    auto dir = std::filesystem::temp_directory_path() / ("adadata_textio_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

void write(const std::filesystem::path &p, const std::string &s) { std::ofstream(p) << s; }

} // namespace

TEST(Bpe, ZeroMergesIsCharacterLevel) {
    const std::vector<std::string> corpus{"low lower"};
    const auto model = learn_bpe(corpus, 0);
    EXPECT_TRUE(model.merges().empty());
    EXPECT_EQ(apply_bpe("low", model), (std::vector<std::string>{"l", "o", "w</w>"}));
}

TEST(Bpe, TieBreakPicksSmallestPair) {
    // (l,o) and (o,w) both occur twice; (l,o) sorts first.
    const std::vector<std::string> corpus{"low", "lower"};
    const auto model = learn_bpe(corpus, 1);
    ASSERT_EQ(model.merges().size(), 1u);
    EXPECT_EQ(model.merges()[0], (SymbolPair{"l", "o"}));
}

TEST(Bpe, StopsWhenNoPairRepeats) {
    // After (l,o) the remaining pairs (lo,w</w>) and (lo,w) occur once each.
    const std::vector<std::string> corpus{"low", "lower"};
    const auto model = learn_bpe(corpus, 100);
    EXPECT_EQ(model.merges().size(), 1u);
    EXPECT_EQ(apply_bpe("low", model), (std::vector<std::string>{"lo", "w</w>"}));
}

TEST(Bpe, SeenWordBecomesSingleToken) {
    const std::vector<std::string> corpus{"low low low", "lower"};
    const auto model = learn_bpe(corpus, 20);
    EXPECT_EQ(apply_bpe("low", model), (std::vector<std::string>{"low</w>"}));
}

TEST(Bpe, EmptyCorpusRejected) {
    const std::vector<std::string> corpus;
    EXPECT_THROW(learn_bpe(corpus, 5), InputError);
}

TEST(Bpe, RoundTripIsLossless) {
    const std::vector<std::string> corpus{"the cat sat on the mat", "der Hund läuft über die Straße",
                                          "a  b", "naïve café  résumé"};
    const auto model = learn_bpe(corpus, 30);
    for (const std::string s : {"the cat sat on the mat", "der Hund läuft über die Straße", "unseen wørds here",
                                "x", "a b c d"}) {
        EXPECT_EQ(detokenize(apply_bpe(s, model)), s);
    }
}

TEST(Bpe, SaveLoadRoundTrip) {
    const auto dir = temp_dir("bpe");
    const std::vector<std::string> corpus{"aaa bbb aaa", "ab ab"};
    const auto model = learn_bpe(corpus, 10);
    model.save(dir / "m.bpe");
    EXPECT_EQ(BpeModel::load(dir / "m.bpe").merges(), model.merges());
    write(dir / "bad.bpe", "not a model\n");
    EXPECT_THROW(BpeModel::load(dir / "bad.bpe"), InputError);
}

TEST(Vocab, ReservedIdsFixed) {
    const Vocabulary v;
    EXPECT_EQ(v.size(), 4u);
    EXPECT_EQ(v.token(kPad), "<pad>");
    EXPECT_EQ(v.token(kUnk), "<unk>");
    EXPECT_EQ(v.token(kBos), "<bos>");
    EXPECT_EQ(v.token(kEos), "<eos>");
}

TEST(Vocab, EmptyCorpusGivesReservedOnly) {
    const std::vector<std::vector<std::string>> corpus;
    EXPECT_EQ(build_vocab(corpus, 1).size(), 4u);
}

TEST(Vocab, MinFrequencyFilters) {
    const std::vector<std::vector<std::string>> corpus{{"a", "a", "b"}};
    const auto v = build_vocab(corpus, 2);
    EXPECT_TRUE(v.contains("a"));
    EXPECT_FALSE(v.contains("b"));
    const std::vector<std::string> toks{"a", "b"};
    EXPECT_EQ(v.encode(toks), (std::vector<int>{4, kUnk}));
}

TEST(Vocab, OrderedByCountThenLexicographic) {
    const std::vector<std::vector<std::string>> corpus{{"b", "c", "a", "c", "b", "d"}};
    const auto v = build_vocab(corpus, 1);
    EXPECT_EQ(v.regular_tokens(), (std::vector<std::string>{"b", "c", "a", "d"}));
}

TEST(Vocab, EncodeDecodeRoundTripAndPersistence) {
    const std::vector<std::vector<std::string>> corpus{{"x", "y", "z"}};
    const auto v = build_vocab(corpus, 1);
    const std::vector<std::string> toks{"z", "x", "y"};
    EXPECT_EQ(v.decode(v.encode(toks)), toks);
    const auto dir = temp_dir("vocab");
    v.save(dir / "v.txt");
    EXPECT_EQ(Vocabulary::load(dir / "v.txt"), v);
}

TEST(Corpus, LineCountMismatchNamesBothCounts) {
    const auto dir = temp_dir("mismatch");
    write(dir / "a.src", "x y\nz\n");
    write(dir / "a.tgt", "u\n");
    const Vocabulary v;
    try {
        load_parallel_corpus(dir / "a.src", dir / "a.tgt", v, v);
        FAIL() << "expected InputError";
    } catch (const InputError &e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find('2'), std::string::npos);
        EXPECT_NE(msg.find('1'), std::string::npos);
    }
}

TEST(Corpus, EncodesAppendsEosAndDropsEmpty) {
    const Vocabulary src({"a", "b"}), tgt({"u"});
    const std::vector<std::string> s{"a b", "", "b"};
    const std::vector<std::string> t{"u u", "u", "q"};
    const auto pairs = encode_parallel_lines(s, t, src, tgt);
    ASSERT_EQ(pairs.size(), 2u);
    EXPECT_EQ(pairs[0].source, (std::vector<int>{4, 5}));
    EXPECT_EQ(pairs[0].target, (std::vector<int>{4, 4, kEos}));
    EXPECT_EQ(pairs[1].line, 2u);
    EXPECT_EQ(pairs[1].target, (std::vector<int>{kUnk, kEos}));
}

TEST(Batching, PartitionBoundAndDeterminism) {
    std::vector<SentencePair> pairs;
    for (std::size_t i = 0; i < 137; ++i) {
        SentencePair p;
        p.source.assign(1 + i % 13, 4);
        p.target.assign(2 + (i * 7) % 11, 4);
        p.line = i;
        pairs.push_back(p);
    }
    const auto batches = batch_iterator(pairs, 64, 5);
    std::vector<std::size_t> seen;
    for (const auto &b : batches) {
        std::size_t longest = 0;
        for (auto i : b) longest = std::max(longest, padded_length(pairs[i]));
        EXPECT_LE(b.size() * longest, 64u);
        seen.insert(seen.end(), b.begin(), b.end());
    }
    std::sort(seen.begin(), seen.end());
    for (std::size_t i = 0; i < seen.size(); ++i) EXPECT_EQ(seen[i], i);
    EXPECT_EQ(seen.size(), pairs.size());
    EXPECT_EQ(batch_iterator(pairs, 64, 5), batches);
    EXPECT_NE(batch_iterator(pairs, 64, 6), batches);
}

TEST(Batching, OverlongPairRejected) {
    std::vector<SentencePair> pairs(1);
    pairs[0].source.assign(10, 4);
    pairs[0].target.assign(3, 4);
    pairs[0].line = 41;
    try {
        batch_iterator(pairs, 8, 1);
        FAIL() << "expected InputError";
    } catch (const InputError &e) {
        EXPECT_NE(std::string(e.what()).find("41"), std::string::npos);
    }
}

TEST(Batching, PaddedBatchShiftsTarget) {
    std::vector<SentencePair> pairs(2);
    pairs[0].source = {4, 5, 6};
    pairs[0].target = {7, kEos};
    pairs[1].source = {4};
    pairs[1].target = {8, 9, kEos};
    const std::vector<std::size_t> idx{0, 1};
    const auto b = make_batch(pairs, idx);
    EXPECT_EQ(b.src_len, 3u);
    EXPECT_EQ(b.tgt_len, 3u);
    EXPECT_EQ(b.target_in[0], (std::vector<int>{kBos, kBos}));
    EXPECT_EQ(b.target_in[1], (std::vector<int>{7, 8}));
    EXPECT_EQ(b.target_out[1], (std::vector<int>{kEos, 9}));
    EXPECT_EQ(b.target_out[2], (std::vector<int>{kPad, kEos}));
    EXPECT_EQ(b.source[2], (std::vector<int>{6, kPad}));
    EXPECT_EQ(b.target_tokens(), 5u);
}

TEST(Toy, MappingAndSwap) {
    ToyOptions o;
    EXPECT_EQ(toy_translate("s20 s3 s30 .", o), "t20 t30 t3 .");
    EXPECT_EQ(toy_translate("s3 s4 s20 .", o), "t3 t20 t4 .");
    EXPECT_EQ(toy_translate("s13 s14", o), "t13 t14");
}

TEST(Toy, CorpusShapeAndDeterminism) {
    ToyOptions o;
    o.train_pairs = 300;
    o.test_pairs = 30;
    const auto a = make_toy_corpus(o);
    const auto b = make_toy_corpus(o);
    EXPECT_EQ(a.train_source, b.train_source);
    EXPECT_EQ(a.test_target, b.test_target);
    ASSERT_EQ(a.train_source.size(), 300u);
    ASSERT_EQ(a.test_source.size(), 30u);
    std::set<std::string> words;
    for (std::size_t i = 0; i < a.train_source.size(); ++i) {
        const auto w = split_whitespace(a.train_source[i]);
        EXPECT_GE(w.size(), o.min_length);
        EXPECT_LE(w.size(), o.max_length);
        EXPECT_EQ(w.back(), ".");
        EXPECT_EQ(a.train_target[i], toy_translate(a.train_source[i], o));
        words.insert(w.begin(), w.end());
    }
    EXPECT_GT(words.size(), 40u);
    o.seed = 8;
    EXPECT_NE(make_toy_corpus(o).train_source, a.train_source);
}
