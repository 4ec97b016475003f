#pragma once

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

enum {
  WILDCUT_CODEC_FLAC = 1,
  WILDCUT_CODEC_MP3 = 2,
  WILDCUT_CODEC_VORBIS = 3,
};

/* Decodes a whole file to interleaved float frames. Returns 0 on success;
 * on failure writes a message into `err` and returns non-zero. */
int wildcut_decode_compressed(const char* path, int format, float** samples,
                              unsigned long long* frames, unsigned* channels,
                              unsigned* sample_rate, char* err, size_t err_len);

void wildcut_free_samples(float* samples);

#ifdef __cplusplus
}
#endif
