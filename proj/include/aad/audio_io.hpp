#pragma once

#include "aad/manifest.hpp"
#include "aad/matrix.hpp"

#include <filesystem>

namespace aad {

/// Reads a RIFF/WAVE file (PCM 16/24/32-bit or IEEE float32); multichannel
/// input is averaged to mono.
TimeSeries read_wav(const std::filesystem::path& path);
void write_wav_float(const TimeSeries& mono, const std::filesystem::path& path);

/// Loads an audio source as a 1-channel series: WAV, or an N x 1 .aadm
/// matrix with the rate given by the source reference.
TimeSeries load_audio(const SourceRef& source);

}  // namespace aad
