#include "modem/classifier.hpp"

#include <cstring>
#include <fstream>
#include <string>

#include <zlib.h>

#include "modem/errors.hpp"

namespace modem {

namespace {

constexpr char kMagic[8] = {'M', 'O', 'D', 'E', 'M', 'C', 'L', 'S'};
constexpr std::uint8_t kFormatVersion = 1;

void append_u32le(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void append_u64le(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void append_f64le(std::string& out, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, sizeof(bits));
    append_u64le(out, bits);
}

void append_section(std::string& out, const std::string& payload) {
    if (payload.size() > 0xFFFFFFFFull) {
        throw CorruptModelError("model section exceeds 4 GiB");
    }
    append_u32le(out, static_cast<std::uint32_t>(payload.size()));
    out.append(payload);
}

/// Sequential reader over the in-memory file image. Every read is
/// bounds-checked so truncated files surface as CorruptModelError rather
/// than undefined behaviour.
class Reader {
public:
    Reader(const std::string& data, std::size_t limit) : data_(data), limit_(limit) {}

    std::size_t offset() const { return pos_; }

    const char* take(std::size_t n) {
        if (pos_ + n > limit_) throw CorruptModelError("model file is truncated");
        const char* p = data_.data() + pos_;
        pos_ += n;
        return p;
    }

    std::uint32_t read_u32le() {
        const unsigned char* p = reinterpret_cast<const unsigned char*>(take(4));
        return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
               static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
    }

    std::uint64_t read_u64le() {
        std::uint64_t v = 0;
        const unsigned char* p = reinterpret_cast<const unsigned char*>(take(8));
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
        return v;
    }

    double read_f64le() {
        std::uint64_t bits = read_u64le();
        double d;
        std::memcpy(&d, &bits, sizeof(d));
        return d;
    }

    std::string read_section() {
        std::uint32_t len = read_u32le();
        const char* p = take(len);
        return std::string(p, len);
    }

private:
    const std::string& data_;
    std::size_t limit_;
    std::size_t pos_ = 0;
};

std::uint32_t crc32_of(const std::string& bytes) {
    uLong crc = ::crc32(0L, Z_NULL, 0);
    crc = ::crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()),
                  static_cast<uInt>(bytes.size()));
    return static_cast<std::uint32_t>(crc);
}

}  // namespace

void save_model(const ClassifierModel& model, const std::filesystem::path& path) {
    std::string out;
    out.append(kMagic, sizeof(kMagic));
    out.push_back(static_cast<char>(kFormatVersion));

    nlohmann::json feature_config = {
        {"hash_dimensions", model.hash_dimensions},
        {"ngrams", {"unigram", "bigram", "char_trigram"}},
        {"normalization", "l2"},
    };
    append_section(out, feature_config.dump());

    // Sparse weights: per class a count followed by (index, float64 bits)
    // pairs in ascending index order. Zero weights are omitted.
    std::string weights;
    for (std::size_t d = 0; d < kDomainCount; ++d) {
        std::string rows;
        std::uint64_t nonzero = 0;
        for (std::uint32_t f = 0; f < model.hash_dimensions; ++f) {
            double w = model.weight(d, f);
            if (w == 0.0) continue;
            append_u32le(rows, f);
            append_f64le(rows, w);
            ++nonzero;
        }
        append_u64le(weights, nonzero);
        weights.append(rows);
    }
    append_section(out, weights);

    std::string bias;
    for (double b : model.bias) append_f64le(bias, b);
    append_section(out, bias);

    append_section(out, model.meta.to_json().dump());

    append_u32le(out, crc32_of(out));

    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError("cannot open model file for writing: " + path.string());
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
    file.flush();
    if (!file) throw IoError("failed writing model file: " + path.string());
}

ClassifierModel load_model(const std::filesystem::path& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw IoError("cannot open model file: " + path.string());
    std::string data((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
    if (file.bad()) throw IoError("failed reading model file: " + path.string());

    if (data.size() < sizeof(kMagic) + 1 + 4) {
        throw CorruptModelError("model file is truncated");
    }

    // The final four bytes are the checksum of everything before them.
    std::size_t body_size = data.size() - 4;
    std::string body = data.substr(0, body_size);
    std::uint32_t stored_crc = 0;
    {
        const unsigned char* p = reinterpret_cast<const unsigned char*>(data.data() + body_size);
        stored_crc = static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
                     static_cast<std::uint32_t>(p[2]) << 16 |
                     static_cast<std::uint32_t>(p[3]) << 24;
    }
    if (crc32_of(body) != stored_crc) {
        throw CorruptModelError("model file checksum mismatch");
    }

    Reader reader(data, body_size);
    if (std::memcmp(reader.take(sizeof(kMagic)), kMagic, sizeof(kMagic)) != 0) {
        throw CorruptModelError("not a classifier model file (bad magic)");
    }
    std::uint8_t version = static_cast<std::uint8_t>(*reader.take(1));
    if (version != kFormatVersion) {
        throw CorruptModelError("unsupported model format version " + std::to_string(version));
    }

    nlohmann::json feature_config;
    try {
        feature_config = nlohmann::json::parse(reader.read_section());
    } catch (const nlohmann::json::exception&) {
        throw CorruptModelError("model feature config is not valid JSON");
    }
    std::uint32_t dims = feature_config.value("hash_dimensions", 0u);
    if (dims != kHashDimensions) {
        throw CorruptModelError("model hash dimensions " + std::to_string(dims) +
                                " do not match this build (" + std::to_string(kHashDimensions) +
                                ")");
    }

    ClassifierModel model = ClassifierModel::zeros();

    std::string weight_bytes = reader.read_section();
    {
        Reader w(weight_bytes, weight_bytes.size());
        for (std::size_t d = 0; d < kDomainCount; ++d) {
            std::uint64_t count = w.read_u64le();
            std::uint32_t prev = 0;
            for (std::uint64_t i = 0; i < count; ++i) {
                std::uint32_t index = w.read_u32le();
                double value = w.read_f64le();
                if (index >= model.hash_dimensions || (i > 0 && index <= prev)) {
                    throw CorruptModelError("model weight indices are out of order");
                }
                model.weight(d, index) = value;
                prev = index;
            }
        }
        if (w.offset() != weight_bytes.size()) {
            throw CorruptModelError("model weight section has trailing bytes");
        }
    }

    std::string bias_bytes = reader.read_section();
    if (bias_bytes.size() != kDomainCount * 8) {
        throw CorruptModelError("model bias section has wrong size");
    }
    {
        Reader b(bias_bytes, bias_bytes.size());
        for (std::size_t d = 0; d < kDomainCount; ++d) model.bias[d] = b.read_f64le();
    }

    try {
        model.meta = TrainingMeta::from_json(nlohmann::json::parse(reader.read_section()));
    } catch (const nlohmann::json::exception&) {
        throw CorruptModelError("model training metadata is not valid JSON");
    }

    if (reader.offset() != body_size) {
        throw CorruptModelError("model file has trailing bytes");
    }
    return model;
}

}  // namespace modem
