#include "aad/audio_io.hpp"

#include "aad/error.hpp"
#include "aad/util.hpp"

#include <cstring>
#include <fstream>
#include <iterator>

namespace aad {

namespace {

std::uint32_t u32(const unsigned char* p) { return p[0] | (p[1] << 8) | (p[2] << 16) | (std::uint32_t(p[3]) << 24); }
std::uint16_t u16(const unsigned char* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }

}  // namespace

TimeSeries read_wav(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ResolutionError("cannot open " + path.string(), path.string());
    const std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const std::string where = path.string();
    if (buf.size() < 12 || std::memcmp(buf.data(), "RIFF", 4) != 0 || std::memcmp(buf.data() + 8, "WAVE", 4) != 0)
        throw FormatError(where + ": not a RIFF/WAVE file");

    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    const unsigned char* data = nullptr;
    std::size_t data_bytes = 0;
    for (std::size_t pos = 12; pos + 8 <= buf.size();) {
        const std::uint32_t len = u32(&buf[pos + 4]);
        const unsigned char* body = &buf[pos + 8];
        const std::size_t avail = buf.size() - (pos + 8);
        if (std::memcmp(&buf[pos], "fmt ", 4) == 0 && len >= 16 && avail >= 16) {
            format = u16(body);
            channels = u16(body + 2);
            rate = u32(body + 4);
            bits = u16(body + 14);
            if (format == 0xFFFE && len >= 26) format = u16(body + 24);  // WAVE_FORMAT_EXTENSIBLE subformat
        } else if (std::memcmp(&buf[pos], "data", 4) == 0) {
            data = body;
            data_bytes = std::min<std::size_t>(len, avail);
        }
        pos += 8 + len + (len & 1);
    }
    if (!data || channels == 0 || rate == 0) throw FormatError(where + ": missing fmt or data chunk");
    const bool is_float = format == 3 && bits == 32;
    const bool is_pcm = format == 1 && (bits == 16 || bits == 24 || bits == 32);
    if (!is_float && !is_pcm) throw FormatError(where + ": unsupported WAV encoding");

    const std::size_t bytes_per = bits / 8;
    const std::size_t frames = data_bytes / (bytes_per * channels);
    MatrixF32 out(frames, 1);
    for (std::size_t f = 0; f < frames; ++f) {
        double acc = 0.0;
        for (std::size_t c = 0; c < channels; ++c) {
            const unsigned char* p = data + (f * channels + c) * bytes_per;
            double v;
            if (is_float) {
                float x;
                std::memcpy(&x, p, 4);
                v = x;
            } else if (bits == 16) {
                v = static_cast<std::int16_t>(u16(p)) / 32768.0;
            } else if (bits == 24) {
                std::int32_t x = p[0] | (p[1] << 8) | (p[2] << 16);
                if (x & 0x800000) x |= ~0xFFFFFF;
                v = x / 8388608.0;
            } else {
                v = static_cast<std::int32_t>(u32(p)) / 2147483648.0;
            }
            acc += v;
        }
        out(f, 0) = static_cast<float>(acc / channels);
    }
    if (!out.all_finite()) throw ValidationError(where + ": non-finite audio samples");
    return TimeSeries(std::move(out), rate);
}

void write_wav_float(const TimeSeries& mono, const std::filesystem::path& path) {
    if (mono.channels() != 1) throw ValidationError("write_wav_float expects one channel");
    const auto rate = static_cast<std::uint32_t>(std::lround(mono.sample_rate_hz));
    const std::uint32_t data_bytes = static_cast<std::uint32_t>(mono.samples() * 4);
    auto le32 = [](std::ostream& os, std::uint32_t v) {
        const char b[4] = {char(v), char(v >> 8), char(v >> 16), char(v >> 24)};
        os.write(b, 4);
    };
    auto le16 = [](std::ostream& os, std::uint16_t v) {
        const char b[2] = {char(v), char(v >> 8)};
        os.write(b, 2);
    };
    atomic_write(path, [&](std::ostream& os) {
        os.write("RIFF", 4);
        le32(os, 36 + data_bytes);
        os.write("WAVEfmt ", 8);
        le32(os, 16);
        le16(os, 3);
        le16(os, 1);
        le32(os, rate);
        le32(os, rate * 4);
        le16(os, 4);
        le16(os, 32);
        os.write("data", 4);
        le32(os, data_bytes);
        const auto d = mono.matrix.data();
        os.write(reinterpret_cast<const char*>(d.data()), data_bytes);
        return 0;
    });
}

TimeSeries load_audio(const SourceRef& source) {
    if (source.kind != SourceRef::Kind::audio) throw ValidationError("load_audio: source is not audio");
    if (source.path.extension() == ".wav") return read_wav(source.path);
    MatrixF32 m = read_matrix_file(source.path);
    if (m.cols() != 1) throw ValidationError(source.path.string() + ": audio matrix must have one column");
    if (!source.sample_rate_hz) throw ValidationError(source.path.string() + ": missing sample_rate_hz");
    return TimeSeries(std::move(m), *source.sample_rate_hz);
}

}  // namespace aad
