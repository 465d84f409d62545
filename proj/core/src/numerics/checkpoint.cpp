#include "adadata/numerics/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "adadata/error.hpp"

namespace adadata::num {

namespace {

constexpr char kMagic[4] = {'A', 'D', 'C', 'K'};

class Writer {
  public:
    void u32(std::uint32_t v) { le(v, 4); }
    void u64(std::uint64_t v) { le(v, 8); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void str(std::string_view s) {
        u32(static_cast<std::uint32_t>(s.size()));
        out_.append(s);
    }
    void raw(const char *p, std::size_t n) { out_.append(p, n); }
    std::string take() { return std::move(out_); }

  private:
    void le(std::uint64_t v, int bytes) {
        for (int i = 0; i < bytes; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
    std::string out_;
};

class Reader {
  public:
    explicit Reader(std::string_view in) : in_(in) {}
    std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
    std::uint64_t u64() { return le(8); }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        const auto n = u32();
        need(n);
        std::string s(in_.substr(pos_, n));
        pos_ += n;
        return s;
    }
    std::string_view raw(std::size_t n) {
        need(n);
        auto s = in_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    bool done() const { return pos_ == in_.size(); }

  private:
    void need(std::size_t n) const {
        if (in_.size() - pos_ < n) throw InputError("checkpoint: truncated file");
    }
    std::uint64_t le(int bytes) {
        need(bytes);
        std::uint64_t v = 0;
        for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
        pos_ += bytes;
        return v;
    }
    std::string_view in_;
    std::size_t pos_ = 0;
};

} // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string serialize_checkpoint(const Checkpoint &ckpt) {
    Writer w;
    w.raw(kMagic, 4);
    w.u32(kCheckpointVersion);
    w.str(ckpt.arch);
    w.str(ckpt.config_json);
    w.u64(ckpt.fingerprint);
    w.u64(ckpt.train_steps);
    for (const auto *tokens : {&ckpt.src_tokens, &ckpt.tgt_tokens}) {
        w.u32(static_cast<std::uint32_t>(tokens->size()));
        for (const auto &t : *tokens) w.str(t);
    }
    w.u32(static_cast<std::uint32_t>(ckpt.params.size()));
    for (const auto &[name, t] : ckpt.params) {
        w.str(name);
        w.u32(static_cast<std::uint32_t>(t.rank()));
        for (auto d : t.shape()) w.u64(d);
        for (double v : t.data()) w.f64(v);
    }
    return w.take();
}

Checkpoint deserialize_checkpoint(std::string_view bytes) {
    Reader r(bytes);
    if (r.raw(4) != std::string_view(kMagic, 4)) throw InputError("checkpoint: bad magic, not an ADCK file");
    const auto version = r.u32();
    if (version != kCheckpointVersion)
        throw CompatibilityError("checkpoint: unsupported format version " + std::to_string(version));
    Checkpoint c;
    c.arch = r.str();
    c.config_json = r.str();
    c.fingerprint = r.u64();
    c.train_steps = r.u64();
    for (auto *tokens : {&c.src_tokens, &c.tgt_tokens}) {
        const auto n = r.u32();
        tokens->reserve(n);
        for (std::uint32_t i = 0; i < n; ++i) tokens->push_back(r.str());
    }
    const auto np = r.u32();
    for (std::uint32_t k = 0; k < np; ++k) {
        std::string name = r.str();
        const auto rank = r.u32();
        if (rank == 0 || rank > 8) throw InputError("checkpoint: parameter " + name + " has invalid rank");
        Shape shape(rank);
        for (auto &d : shape) d = r.u64();
        const std::size_t n = numel(shape);
        if (n == 0 || n > (1ULL << 32)) throw InputError("checkpoint: parameter " + name + " has invalid shape");
        std::vector<double> values(n);
        for (auto &v : values) v = r.f64();
        c.params.emplace_back(std::move(name), Tensor::from(std::move(shape), std::move(values), true));
    }
    if (!r.done()) throw InputError("checkpoint: trailing bytes");
    return c;
}

void write_file_atomic(const std::filesystem::path &path, std::string_view contents) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot open " + tmp.string() + " for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) throw InputError("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw InputError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

void write_checkpoint(const std::filesystem::path &path, const Checkpoint &ckpt) {
    write_file_atomic(path, serialize_checkpoint(ckpt));
}

Checkpoint read_checkpoint(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open checkpoint " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return deserialize_checkpoint(ss.str());
}

void load_parameters(const std::vector<std::pair<std::string, Tensor>> &params,
                     const std::vector<std::pair<std::string, Tensor>> &stored) {
    if (params.size() != stored.size())
        throw CompatibilityError("checkpoint holds " + std::to_string(stored.size()) + " parameters, model expects " +
                                 std::to_string(params.size()));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto &[name, t] = params[i];
        const auto &[sname, st] = stored[i];
        if (name != sname || t.shape() != st.shape())
            throw CompatibilityError("checkpoint parameter " + sname + num::shape_str(st.shape()) + " does not match " +
                                     name + num::shape_str(t.shape()));
        Tensor dst = t;
        std::copy(st.data().begin(), st.data().end(), dst.mutable_data().begin());
    }
}

} // namespace adadata::num
