#include "bsvie/errors.hpp"
#include "bsvie/world.hpp"

#include <json.hpp>

#include <bit>
#include <cstring>
#include <fstream>

namespace bsvie {

namespace {

constexpr char kMagic[8] = {'B', 'S', 'V', 'I', 'E', 'E', 'N', 'S'};

static_assert(std::endian::native == std::endian::little, "ensemble files are little-endian");

void write_column(std::ofstream& out, const Values& v) {
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
}

Values read_column(std::ifstream& in, std::size_t n) {
    Values v(n);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) {
        throw ValidationError("ensemble file truncated");
    }
    return v;
}

std::string quantization_name(BrownianQuantization q) {
    switch (q) {
    case BrownianQuantization::none: return "none";
    case BrownianQuantization::binomial: return "binomial";
    case BrownianQuantization::trinomial: return "trinomial";
    }
    return "none";
}

BrownianQuantization quantization_from(const std::string& s) {
    if (s == "none") return BrownianQuantization::none;
    if (s == "binomial") return BrownianQuantization::binomial;
    if (s == "trinomial") return BrownianQuantization::trinomial;
    throw ValidationError("ensemble header: unknown brownian kind '" + s + "'");
}

}  // namespace

void export_ensemble(const World& world, const std::string& path) {
    const World::Raw raw = world.to_raw();
    nlohmann::json h;
    h["format"] = "bsvie-ensemble";
    h["version"] = 1;
    h["grid"] = raw.clock.times;
    h["B"] = raw.clock.B;
    h["alpha"] = raw.clock.alpha;
    h["A"] = raw.clock.A;
    h["frak_f"] = raw.clock.frak_f.value();
    h["ito"] = raw.clock.ito;
    h["marks"] = raw.jumps.marks;
    h["intensities"] = raw.jumps.intensities;
    h["brownian"] = quantization_name(raw.brownian);
    h["extra_noise"] = raw.extra_noise;
    h["seed"] = raw.seed;
    h["n_paths"] = raw.n_paths;
    h["dw_var"] = raw.dw_var;
    h["jump_var"] = raw.jump_var;
    h["columns"] = "weights, then per step: dW, dN[mark...], eps";
    const std::string header = h.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ValidationError("cannot open '" + path + "' for writing");
    }
    out.write(kMagic, sizeof kMagic);
    const std::uint64_t len = header.size();
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    write_column(out, raw.weights);
    for (std::size_t i = 0; i < raw.dW.size(); ++i) {
        write_column(out, raw.dW[i]);
        for (const auto& col : raw.dN[i]) {
            write_column(out, col);
        }
        write_column(out, raw.eps[i]);
    }
}

World import_ensemble(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ValidationError("cannot open ensemble file '" + path + "'");
    }
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) {
        throw ValidationError("'" + path + "' is not an ensemble file");
    }
    std::uint64_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof len);
    std::string header(len, '\0');
    in.read(header.data(), static_cast<std::streamsize>(len));
    if (!in) {
        throw ValidationError("ensemble header truncated");
    }
    const auto h = nlohmann::json::parse(header);

    World::Raw raw;
    raw.clock.times = h.at("grid").get<std::vector<double>>();
    raw.clock.B = h.at("B").get<std::vector<double>>();
    raw.clock.alpha = h.at("alpha").get<std::vector<double>>();
    raw.clock.A = h.at("A").get<std::vector<double>>();
    raw.clock.frak_f = JumpBound(h.at("frak_f").get<double>());
    raw.clock.ito = h.at("ito").get<bool>();
    if (raw.clock.times.size() < 2 || raw.clock.B.size() != raw.clock.times.size() ||
        raw.clock.A.size() != raw.clock.times.size() || raw.clock.alpha.size() + 1 != raw.clock.times.size()) {
        throw ValidationError("ensemble header: inconsistent clock");
    }
    raw.jumps.marks = h.at("marks").get<std::vector<double>>();
    raw.jumps.intensities = h.at("intensities").get<std::vector<double>>();
    raw.brownian = quantization_from(h.at("brownian").get<std::string>());
    raw.extra_noise = h.at("extra_noise").get<bool>();
    raw.seed = h.at("seed").get<std::uint64_t>();
    raw.n_paths = h.at("n_paths").get<std::size_t>();
    raw.dw_var = h.at("dw_var").get<std::vector<double>>();
    raw.jump_var = h.at("jump_var").get<std::vector<std::vector<double>>>();

    const std::size_t n = raw.clock.steps();
    const std::size_t m = raw.jumps.size();
    raw.weights = read_column(in, raw.n_paths);
    for (std::size_t i = 0; i < n; ++i) {
        raw.dW.push_back(read_column(in, raw.n_paths));
        raw.dN.emplace_back();
        for (std::size_t k = 0; k < m; ++k) {
            raw.dN.back().push_back(read_column(in, raw.n_paths));
        }
        raw.eps.push_back(read_column(in, raw.n_paths));
    }
    return World::from_raw(std::move(raw));
}

}  // namespace bsvie
