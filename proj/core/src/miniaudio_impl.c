/* Compressed-format decoding (FLAC, MP3, Ogg Vorbis) through miniaudio. */
#define STB_VORBIS_HEADER_ONLY
#include "stb_vorbis.c"

#define MA_NO_DEVICE_IO
#define MA_NO_ENGINE
#define MA_NO_NODE_GRAPH
#define MA_NO_RESOURCE_MANAGER
#define MA_NO_GENERATION
#define MA_NO_ENCODING
#define MINIAUDIO_IMPLEMENTATION
#include "miniaudio.h"

#undef STB_VORBIS_HEADER_ONLY
#include "stb_vorbis.c"

#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "codec_bridge.h"

int wildcut_decode_compressed(const char* path, int format, float** samples,
                              unsigned long long* frames, unsigned* channels,
                              unsigned* sample_rate, char* err,
                              size_t err_len) {
  ma_decoder_config cfg = ma_decoder_config_init(ma_format_f32, 0, 0);
  switch (format) {
    case WILDCUT_CODEC_FLAC: cfg.encodingFormat = ma_encoding_format_flac; break;
    case WILDCUT_CODEC_MP3: cfg.encodingFormat = ma_encoding_format_mp3; break;
    case WILDCUT_CODEC_VORBIS: cfg.encodingFormat = ma_encoding_format_vorbis; break;
    default:
      snprintf(err, err_len, "unknown codec id %d", format);
      return -1;
  }
  ma_decoder dec;
  ma_result rc = ma_decoder_init_file(path, &cfg, &dec);
  if (rc != MA_SUCCESS) {
    snprintf(err, err_len, "decoder init failed: %s", ma_result_description(rc));
    return -1;
  }
  const unsigned ch = dec.outputChannels;
  const unsigned sr = dec.outputSampleRate;
  size_t cap = 1 << 16;
  size_t used = 0;
  float* buf = (float*)malloc(cap * ch * sizeof(float));
  if (!buf) {
    ma_decoder_uninit(&dec);
    snprintf(err, err_len, "out of memory");
    return -1;
  }
  for (;;) {
    if (used == cap) {
      cap *= 2;
      float* grown = (float*)realloc(buf, cap * ch * sizeof(float));
      if (!grown) {
        free(buf);
        ma_decoder_uninit(&dec);
        snprintf(err, err_len, "out of memory");
        return -1;
      }
      buf = grown;
    }
    ma_uint64 got = 0;
    rc = ma_decoder_read_pcm_frames(&dec, buf + used * ch, cap - used, &got);
    used += (size_t)got;
    if (rc == MA_AT_END || got == 0) break;
    if (rc != MA_SUCCESS) {
      free(buf);
      ma_decoder_uninit(&dec);
      snprintf(err, err_len, "decode failed after %zu frames: %s", used,
               ma_result_description(rc));
      return -1;
    }
  }
  ma_decoder_uninit(&dec);
  *samples = buf;
  *frames = used;
  *channels = ch;
  *sample_rate = sr;
  return 0;
}

void wildcut_free_samples(float* samples) { free(samples); }
