// SPDX-License-Identifier: Apache-2.0

#include "eegpipe/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <vector>

namespace eegpipe::nn {

namespace {

constexpr char kMagic[6] = {'N', 'L', 'S', 'T', 'M', '1'};

void put_u32(std::ofstream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ofstream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ofstream& out, double d) { put_u64(out, std::bit_cast<std::uint64_t>(d)); }

struct Reader {
    std::vector<char> bytes;
    std::size_t pos = 0;

    std::size_t remaining() const { return bytes.size() - pos; }

    void need(std::size_t n, const char* what) {
        if (remaining() < n) throw ParseError(std::string("checkpoint truncated reading ") + what);
    }
    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
        pos += 4;
        return v;
    }
    std::uint64_t u64(const char* what) {
        need(8, what);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
        pos += 8;
        return v;
    }
    double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
    std::string str(std::size_t n, const char* what) {
        need(n, what);
        std::string s(bytes.data() + pos, n);
        pos += n;
        return s;
    }
};

}  // namespace

void save_checkpoint(const ModelParams& model, std::uint64_t seed,
                     const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open " + path.string() + " for writing");
    out.write(kMagic, sizeof(kMagic));

    const std::string arch = arch_name(model.arch);
    put_u32(out, static_cast<std::uint32_t>(arch.size()));
    out.write(arch.data(), static_cast<std::streamsize>(arch.size()));

    visit_tensors(model, [&out](const std::string& name, Eigen::Map<const Eigen::MatrixXd> m) {
        put_u32(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        const bool vector = m.cols() == 1;
        put_u32(out, vector ? 1u : 2u);
        if (vector) {
            put_u32(out, static_cast<std::uint32_t>(m.rows()));
        } else {
            put_u32(out, static_cast<std::uint32_t>(m.rows()));
            put_u32(out, static_cast<std::uint32_t>(m.cols()));
        }
        for (long r = 0; r < m.rows(); ++r)
            for (long c = 0; c < m.cols(); ++c) put_f64(out, m(r, c));
    });

    put_u64(out, seed);
    if (!out) throw ParseError("write failed for " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open checkpoint " + path.string());
    Reader rd;
    rd.bytes.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());

    rd.need(sizeof(kMagic), "magic");
    if (std::memcmp(rd.bytes.data(), kMagic, sizeof(kMagic)) != 0)
        throw ParseError(path.string() + " is not a checkpoint (bad magic)");
    rd.pos = sizeof(kMagic);

    const std::uint32_t arch_len = rd.u32("arch length");
    const Arch arch = parse_arch(rd.str(arch_len, "arch string"));

    struct RawTensor {
        std::vector<std::uint32_t> dims;
        std::vector<double> values;
    };
    std::map<std::string, RawTensor> tensors;
    while (rd.remaining() > 8) {
        const std::uint32_t name_len = rd.u32("tensor name length");
        const std::string name = rd.str(name_len, "tensor name");
        const std::uint32_t rank = rd.u32("tensor rank");
        if (rank < 1 || rank > 2) throw ParseError("unsupported tensor rank in " + name);
        RawTensor t;
        std::size_t count = 1;
        for (std::uint32_t d = 0; d < rank; ++d) {
            t.dims.push_back(rd.u32("tensor dims"));
            count *= t.dims.back();
        }
        t.values.reserve(count);
        for (std::size_t i = 0; i < count; ++i) t.values.push_back(rd.f64("tensor values"));
        if (!tensors.emplace(name, std::move(t)).second)
            throw ParseError("duplicate tensor " + name + " in checkpoint");
    }
    const std::uint64_t seed = rd.u64("seed record");

    // shapes from the canonical tensors
    auto dims_of = [&tensors](const std::string& name) -> const std::vector<std::uint32_t>& {
        auto it = tensors.find(name);
        if (it == tensors.end()) throw ParseError("checkpoint missing tensor " + name);
        return it->second.dims;
    };
    const auto& wi = dims_of("fwd.W_i");
    if (wi.size() != 2) throw ParseError("fwd.W_i must be rank 2");
    const int hidden = static_cast<int>(wi[0]);
    const int input_dim = static_cast<int>(wi[1]);
    const auto& wout = dims_of("output.W");
    const int classes = static_cast<int>(wout[0]);

    LoadedCheckpoint loaded;
    loaded.seed = seed;
    loaded.model = init_model(arch, input_dim, hidden, classes, 0);

    std::size_t used = 0;
    visit_tensors(loaded.model, [&](const std::string& name, Eigen::Map<Eigen::MatrixXd> m) {
        auto it = tensors.find(name);
        if (it == tensors.end()) throw ParseError("checkpoint missing tensor " + name);
        const RawTensor& t = it->second;
        const long rows = static_cast<long>(t.dims[0]);
        const long cols = t.dims.size() == 2 ? static_cast<long>(t.dims[1]) : 1;
        if (rows != m.rows() || cols != m.cols())
            throw ParseError("tensor " + name + " has unexpected shape");
        std::size_t k = 0;
        for (long r = 0; r < rows; ++r)
            for (long c = 0; c < cols; ++c) m(r, c) = t.values[k++];
        ++used;
    });
    if (used != tensors.size())
        throw ParseError("checkpoint contains tensors not used by architecture " +
                         arch_name(arch));
    return loaded;
}

}  // namespace eegpipe::nn
