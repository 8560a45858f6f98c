#include "mucos/checkpoint.hpp"

#include "mucos/error.hpp"
#include "mucos/hashing.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace mucos {

namespace {

constexpr std::array<char, 8> kMagic{'M', 'U', 'C', 'O', 'S', 'C', 'K', 'P'};

template <class U>
void put_le(std::ostream& out, U value) {
    std::array<char, sizeof(U)> bytes{};
    for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((value >> (8 * i)) & 0xff);
    out.write(bytes.data(), bytes.size());
}

template <class U>
U get_le(std::istream& in, const std::string& path) {
    std::array<unsigned char, sizeof(U)> bytes{};
    if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size()))
        throw DataError(path + ": truncated checkpoint");
    U value = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
    return value;
}

std::uint64_t parse_hex(const std::string& s) {
    std::uint64_t v = 0;
    std::istringstream in(s);
    in >> std::hex >> v;
    return v;
}

}  // namespace

nlohmann::json to_json(const EncoderConfig& cfg) {
    return {{"d_model", cfg.d_model}, {"n_layers", cfg.n_layers},   {"n_heads", cfg.n_heads},
            {"ff_dim", cfg.ff_dim},   {"max_seq_len", cfg.max_seq_len}, {"dropout", cfg.dropout},
            {"n_segments", cfg.n_segments}};
}

EncoderConfig encoder_config_from_json(const nlohmann::json& j) {
    EncoderConfig c;
    c.d_model = j.at("d_model").get<std::size_t>();
    c.n_layers = j.at("n_layers").get<std::size_t>();
    c.n_heads = j.at("n_heads").get<std::size_t>();
    c.ff_dim = j.at("ff_dim").get<std::size_t>();
    c.max_seq_len = j.at("max_seq_len").get<std::size_t>();
    c.dropout = j.at("dropout").get<double>();
    c.n_segments = j.at("n_segments").get<std::size_t>();
    c.validate();
    return c;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    const ModelState& s = ckpt.state;
    nlohmann::json header;
    header["format"] = "mucos-checkpoint";
    header["version"] = kCheckpointVersion;
    header["encoder"] = to_json(s.encoder_config);
    header["entity_count"] = s.entity_count;
    header["relation_count"] = s.relation_count;
    header["step"] = s.step;
    header["vocab_hash"] = to_hex(s.vocab_hash);
    header["metadata"] = ckpt.metadata;
    nlohmann::json table = nlohmann::json::array();
    for (const auto& t : s.params.tensors())
        table.push_back({{"name", t.name}, {"rows", t.value->rows()}, {"cols", t.value->cols()}, {"dtype", "f64le"}});
    header["tensors"] = table;
    const std::string text = header.dump();

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write checkpoint '" + path + "'");
    out.write(kMagic.data(), kMagic.size());
    put_le<std::uint32_t>(out, kCheckpointVersion);
    put_le<std::uint64_t>(out, text.size());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& t : s.params.tensors()) {
        const Matrix& m = *t.value;
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(m(r, c)));
        }
    }
    if (!out) throw Error("failed writing checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint '" + path + "'");
    std::array<char, 8> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw DataError(path + ": not a checkpoint file");
    const auto version = get_le<std::uint32_t>(in, path);
    if (version != kCheckpointVersion)
        throw DataError(path + ": unsupported checkpoint version " + std::to_string(version));
    const auto header_len = get_le<std::uint64_t>(in, path);
    if (header_len > (1ULL << 30)) throw DataError(path + ": implausible header length");
    std::string text(header_len, '\0');
    if (!in.read(text.data(), static_cast<std::streamsize>(header_len))) throw DataError(path + ": truncated header");

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": bad header: " + e.what());
    }

    Checkpoint ckpt;
    try {
        if (header.at("version").get<std::uint32_t>() != version) throw DataError(path + ": version mismatch");
        ModelState& s = ckpt.state;
        s.encoder_config = encoder_config_from_json(header.at("encoder"));
        s.entity_count = header.at("entity_count").get<std::size_t>();
        s.relation_count = header.at("relation_count").get<std::size_t>();
        s.step = header.at("step").get<std::uint64_t>();
        s.vocab_hash = parse_hex(header.at("vocab_hash").get<std::string>());
        ckpt.metadata = header.value("metadata", nlohmann::json::object());
        s.params = ModelState::initialize(s.encoder_config, s.entity_count, s.relation_count, 0).params;

        const auto& table = header.at("tensors");
        auto tensors = s.params.tensors();
        if (table.size() != tensors.size()) throw DataError(path + ": tensor count does not match the model layout");
        for (std::size_t i = 0; i < tensors.size(); ++i) {
            const auto& entry = table[i];
            Matrix& m = *tensors[i].value;
            if (entry.at("name").get<std::string>() != tensors[i].name ||
                entry.at("rows").get<Eigen::Index>() != m.rows() || entry.at("cols").get<Eigen::Index>() != m.cols())
                throw DataError(path + ": tensor '" + entry.at("name").get<std::string>() +
                                "' does not match the declared configuration");
            for (Eigen::Index r = 0; r < m.rows(); ++r) {
                for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = std::bit_cast<double>(get_le<std::uint64_t>(in, path));
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": bad header: " + e.what());
    } catch (const ConfigError& e) {
        throw DataError(path + ": bad encoder configuration: " + e.what());
    }
    if (in.peek() != std::char_traits<char>::eof()) throw DataError(path + ": trailing bytes after tensor data");
    return ckpt;
}

}  // namespace mucos
