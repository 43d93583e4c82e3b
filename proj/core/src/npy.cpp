#include "repsim/npy.hpp"

#include "repsim/error.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace repsim {
namespace {

constexpr char kMagic[6] = {'\x93', 'N', 'U', 'M', 'P', 'Y'};
constexpr std::size_t kHeaderAlign = 64;

std::string format_path(const std::filesystem::path& p) { return p.string(); }

// Minimal parser for the Python dict literal in an NPY header. Only the
// three required keys are recognized; anything structurally off raises a
// format error.
struct HeaderFields {
    std::string descr;
    bool fortran_order = false;
    std::vector<std::size_t> shape;
};

void skip_spaces(const std::string& s, std::size_t& pos) {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t' || s[pos] == '\n')) ++pos;
}

std::string parse_quoted(const std::string& s, std::size_t& pos) {
    if (pos >= s.size() || (s[pos] != '\'' && s[pos] != '"')) {
        raise(ErrorKind::format, "NPY header: expected quoted string");
    }
    const char quote = s[pos++];
    std::string out;
    while (pos < s.size() && s[pos] != quote) out.push_back(s[pos++]);
    if (pos >= s.size()) raise(ErrorKind::format, "NPY header: unterminated string");
    ++pos;
    return out;
}

HeaderFields parse_header_dict(const std::string& text) {
    HeaderFields fields;
    bool saw_descr = false, saw_order = false, saw_shape = false;
    std::size_t pos = 0;
    skip_spaces(text, pos);
    if (pos >= text.size() || text[pos] != '{') {
        raise(ErrorKind::format, "NPY header: missing opening brace");
    }
    ++pos;
    while (true) {
        skip_spaces(text, pos);
        if (pos >= text.size()) raise(ErrorKind::format, "NPY header: unterminated dict");
        if (text[pos] == '}') break;
        const std::string key = parse_quoted(text, pos);
        skip_spaces(text, pos);
        if (pos >= text.size() || text[pos] != ':') {
            raise(ErrorKind::format, "NPY header: expected ':' after key");
        }
        ++pos;
        skip_spaces(text, pos);
        if (key == "descr") {
            fields.descr = parse_quoted(text, pos);
            saw_descr = true;
        } else if (key == "fortran_order") {
            if (text.compare(pos, 4, "True") == 0) {
                fields.fortran_order = true;
                pos += 4;
            } else if (text.compare(pos, 5, "False") == 0) {
                fields.fortran_order = false;
                pos += 5;
            } else {
                raise(ErrorKind::format, "NPY header: fortran_order must be True or False");
            }
            saw_order = true;
        } else if (key == "shape") {
            if (pos >= text.size() || text[pos] != '(') {
                raise(ErrorKind::format, "NPY header: shape must be a tuple");
            }
            ++pos;
            while (true) {
                skip_spaces(text, pos);
                if (pos >= text.size()) raise(ErrorKind::format, "NPY header: unterminated shape");
                if (text[pos] == ')') {
                    ++pos;
                    break;
                }
                std::size_t digits = 0;
                std::size_t value = 0;
                while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
                    value = value * 10 + static_cast<std::size_t>(text[pos] - '0');
                    ++pos;
                    ++digits;
                }
                if (digits == 0) raise(ErrorKind::format, "NPY header: bad shape entry");
                fields.shape.push_back(value);
                skip_spaces(text, pos);
                if (pos < text.size() && text[pos] == ',') ++pos;
            }
            saw_shape = true;
        } else {
            raise(ErrorKind::format, "NPY header: unknown key '" + key + "'");
        }
        skip_spaces(text, pos);
        if (pos < text.size() && text[pos] == ',') ++pos;
    }
    if (!saw_descr || !saw_order || !saw_shape) {
        raise(ErrorKind::format, "NPY header: missing required key");
    }
    return fields;
}

}  // namespace

Tensor read_array(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorKind::io, "cannot open " + format_path(path));

    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 6) != 0) {
        raise(ErrorKind::format, format_path(path) + ": not an NPY file");
    }
    const unsigned major = static_cast<unsigned char>(magic[6]);
    const unsigned minor = static_cast<unsigned char>(magic[7]);
    if (major != 1 || minor != 0) {
        raise(ErrorKind::unsupported, format_path(path) + ": NPY version " +
                                          std::to_string(major) + "." + std::to_string(minor) +
                                          " not supported (v1.0 only)");
    }

    unsigned char len_bytes[2];
    in.read(reinterpret_cast<char*>(len_bytes), 2);
    if (!in) raise(ErrorKind::format, format_path(path) + ": truncated header length");
    const std::size_t header_len =
        static_cast<std::size_t>(len_bytes[0]) | (static_cast<std::size_t>(len_bytes[1]) << 8);

    std::string header(header_len, '\0');
    in.read(header.data(), static_cast<std::streamsize>(header_len));
    if (!in) raise(ErrorKind::format, format_path(path) + ": truncated header");

    const HeaderFields fields = parse_header_dict(header);
    if (fields.fortran_order) {
        raise(ErrorKind::unsupported, format_path(path) + ": Fortran-order arrays not supported");
    }
    Dtype dtype;
    if (fields.descr == "<f4") {
        dtype = Dtype::f32;
    } else if (fields.descr == "<f8") {
        dtype = Dtype::f64;
    } else {
        raise(ErrorKind::unsupported,
              format_path(path) + ": dtype '" + fields.descr + "' not supported (<f4/<f8 only)");
    }
    if (fields.shape.empty() || fields.shape.size() > 5) {
        raise(ErrorKind::unsupported, format_path(path) + ": rank " +
                                          std::to_string(fields.shape.size()) +
                                          " outside supported 1..5");
    }

    const std::size_t count = Tensor::element_count(fields.shape);
    const std::size_t item_size = dtype == Dtype::f32 ? 4 : 8;
    std::vector<char> payload(count * item_size);
    in.read(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (static_cast<std::size_t>(in.gcount()) != payload.size()) {
        raise(ErrorKind::format, format_path(path) + ": truncated payload");
    }
    in.peek();
    if (!in.eof()) {
        raise(ErrorKind::format, format_path(path) + ": trailing bytes after payload");
    }

    std::vector<double> values(count);
    if (dtype == Dtype::f32) {
        const float* src = reinterpret_cast<const float*>(payload.data());
        for (std::size_t i = 0; i < count; ++i) values[i] = static_cast<double>(src[i]);
    } else {
        std::memcpy(values.data(), payload.data(), payload.size());
    }

    Tensor t(fields.shape, std::move(values), dtype);
    if (!t.all_finite()) {
        raise(ErrorKind::data, format_path(path) + ": array contains non-finite values");
    }
    return t;
}

void write_array(const Tensor& t, const std::filesystem::path& path) {
    if (!t.all_finite()) {
        raise(ErrorKind::data, "refusing to write non-finite tensor to " + format_path(path));
    }
    if (t.rank() < 1 || t.rank() > 5) {
        raise(ErrorKind::unsupported,
              "rank " + std::to_string(t.rank()) + " outside supported 1..5");
    }

    std::ostringstream dict;
    dict << "{'descr': '" << (t.dtype() == Dtype::f32 ? "<f4" : "<f8")
         << "', 'fortran_order': False, 'shape': (";
    for (std::size_t i = 0; i < t.rank(); ++i) {
        dict << t.shape()[i];
        if (t.rank() == 1 || i + 1 < t.rank()) dict << ",";
        if (i + 1 < t.rank()) dict << " ";
    }
    dict << "), }";
    std::string header = dict.str();
    const std::size_t unpadded = 10 + header.size() + 1;  // magic+version+len, text, newline
    const std::size_t padding = (kHeaderAlign - unpadded % kHeaderAlign) % kHeaderAlign;
    header.append(padding, ' ');
    header.push_back('\n');

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(ErrorKind::io, "cannot open " + format_path(path) + " for writing");

    out.write(kMagic, 6);
    out.put('\x01');
    out.put('\x00');
    const std::size_t header_len = header.size();
    out.put(static_cast<char>(header_len & 0xff));
    out.put(static_cast<char>((header_len >> 8) & 0xff));
    out.write(header.data(), static_cast<std::streamsize>(header.size()));

    if (t.dtype() == Dtype::f32) {
        std::vector<float> buf(t.size());
        for (std::size_t i = 0; i < t.size(); ++i) buf[i] = static_cast<float>(t.data()[i]);
        out.write(reinterpret_cast<const char*>(buf.data()),
                  static_cast<std::streamsize>(buf.size() * sizeof(float)));
    } else {
        out.write(reinterpret_cast<const char*>(t.data()),
                  static_cast<std::streamsize>(t.size() * sizeof(double)));
    }
    if (!out) raise(ErrorKind::io, "write failed for " + format_path(path));
}

}  // namespace repsim
