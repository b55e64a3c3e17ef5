#include "g2t/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "g2t/config.hpp"
#include "g2t/errors.hpp"

namespace g2t {

namespace {

constexpr char kMagic[8] = {'G', '2', 'T', 'C', 'K', 'P', 'T', '\x01'};

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double d) {
    put_u64(out, std::bit_cast<std::uint64_t>(d));
}

void put_str(std::vector<std::uint8_t>& out, const std::string& s) {
    put_u64(out, s.size());
    out.insert(out.end(), s.begin(), s.end());
}

void put_tensor_values(std::vector<std::uint8_t>& out, const Tensor& t) {
    for (double d : t.values()) put_f64(out, d);
}

struct Reader {
    const std::vector<std::uint8_t>& buf;
    std::size_t pos = 0;

    // overflow-safe: pos never exceeds buf.size()
    void need(std::size_t n) const {
        if (n > buf.size() - pos) throw ParseError("truncated checkpoint");
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[pos + i]) << (8 * i);
        pos += 8;
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        std::uint64_t n = u64();
        need(n);
        std::string s(buf.begin() + static_cast<std::ptrdiff_t>(pos),
                      buf.begin() + static_cast<std::ptrdiff_t>(pos + n));
        pos += n;
        return s;
    }
    std::vector<double> doubles(std::size_t n) {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = f64();
        return v;
    }
};

std::vector<std::string> read_token_list(Reader& r) {
    std::uint64_t n = r.u64();
    std::vector<std::string> tokens;
    tokens.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) tokens.push_back(r.str());
    return tokens;
}

} // namespace

std::vector<std::uint8_t> checkpoint_bytes(const Model& model, const AdamState& adam,
                                           const std::string& rng_state, int completed_epochs) {
    std::vector<NamedTensor> params = named_tensors(model);
    if (adam.m.size() != params.size() || adam.v.size() != params.size()) {
        throw ContractError("checkpoint_bytes: optimizer state does not match the model");
    }

    std::vector<std::uint8_t> out;
    out.insert(out.end(), kMagic, kMagic + sizeof(kMagic));
    put_str(out, config_to_text(model.config));

    put_u64(out, model.vocabs.input.size());
    for (const auto& t : model.vocabs.input.tokens()) put_str(out, t);
    put_u64(out, model.vocabs.output.size());
    for (const auto& t : model.vocabs.output.tokens()) put_str(out, t);

    put_str(out, rng_state);
    put_u64(out, static_cast<std::uint64_t>(completed_epochs));
    put_u64(out, static_cast<std::uint64_t>(adam.t));

    put_u64(out, params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        const Tensor& t = params[i].tensor;
        put_str(out, params[i].name);
        put_u64(out, t.rank());
        for (std::size_t d : t.shape()) put_u64(out, d);
        put_tensor_values(out, t);
        put_tensor_values(out, adam.m[i]);
        put_tensor_values(out, adam.v[i]);
    }
    return out;
}

Snapshot checkpoint_from_bytes(const std::vector<std::uint8_t>& bytes) {
    Reader r{bytes};
    r.need(sizeof(kMagic));
    if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
        throw ParseError("not a checkpoint file (bad magic)");
    }
    r.pos = sizeof(kMagic);

    Snapshot snap;
    TrainConfig cfg = parse_config_text(r.str());

    Vocabs vocabs;
    vocabs.input = Vocab::from_tokens(read_token_list(r));
    vocabs.output = Vocab::from_tokens(read_token_list(r));

    snap.rng_state = r.str();
    snap.completed_epochs = static_cast<int>(r.u64());
    const std::int64_t adam_t = static_cast<std::int64_t>(r.u64());

    Rng init_rng(cfg.seed);
    snap.model = make_model(cfg, std::move(vocabs), init_rng);
    std::vector<NamedTensor> params = named_tensors(snap.model);

    const std::uint64_t count = r.u64();
    if (count != params.size()) {
        throw ParseError("checkpoint holds " + std::to_string(count) + " tensors, model needs " +
                         std::to_string(params.size()));
    }
    snap.adam.t = adam_t;
    for (auto& nt : params) {
        std::string name = r.str();
        if (name != nt.name) {
            throw ParseError("checkpoint tensor '" + name + "' where '" + nt.name +
                             "' was expected");
        }
        std::uint64_t rank = r.u64();
        Shape shape;
        for (std::uint64_t d = 0; d < rank; ++d) shape.push_back(r.u64());
        if (shape != nt.tensor.shape()) {
            throw ParseError("checkpoint tensor '" + name + "' has shape " + shape_str(shape) +
                             ", model needs " + shape_str(nt.tensor.shape()));
        }
        const std::size_t n = nt.tensor.size();
        nt.tensor.set_values(r.doubles(n));
        snap.adam.m.push_back(Tensor::from(shape, r.doubles(n)));
        snap.adam.v.push_back(Tensor::from(shape, r.doubles(n)));
    }
    if (r.pos != bytes.size()) throw ParseError("trailing bytes after checkpoint payload");
    return snap;
}

void save_checkpoint(const std::string& path, const Model& model, const AdamState& adam,
                     const std::string& rng_state, int completed_epochs) {
    std::vector<std::uint8_t> bytes = checkpoint_bytes(model, adam, rng_state, completed_epochs);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open checkpoint file for writing: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("failed writing checkpoint: " + path);
}

Snapshot load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open checkpoint file: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return checkpoint_from_bytes(bytes);
}

} // namespace g2t
