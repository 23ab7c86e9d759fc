#pragma once

// Straight-line IMA/DVI ADPCM following the 1992 IMA recommendation: the
// difference is quantized by successive comparison against step, step/2,
// step/4 and the reconstruction adds step/8. Deliberately shares nothing
// with the library implementation.

#include <cstdint>
#include <vector>

namespace oracle {

inline const int kImaSteps[89] = {
    7,     8,     9,     10,    11,    12,    13,    14,    16,    17,    19,    21,    23,    25,    28,
    31,    34,    37,    41,    45,    50,    55,    60,    66,    73,    80,    88,    97,    107,   118,
    130,   143,   157,   173,   190,   209,   230,   253,   279,   307,   337,   371,   408,   449,   494,
    544,   598,   658,   724,   796,   876,   963,   1060,  1166,  1282,  1411,  1552,  1707,  1878,  2066,
    2272,  2499,  2749,  3024,  3327,  3660,  4026,  4428,  4871,  5358,  5894,  6484,  7132,  7845,  8630,
    9493,  10442, 11487, 12635, 13899, 15289, 16818, 18500, 20350, 22385, 24623, 27086, 29794, 32767};

inline const int kImaIndexTable[8] = {-1, -1, -1, -1, 2, 4, 6, 8};

struct ImaCodes {
  std::vector<int> codes;
  std::vector<int> decoded;  // the encoder's own reconstruction
};

inline ImaCodes ima_encode(const std::vector<int16_t>& pcm, int predictor = 0, int index = 0) {
  ImaCodes out;
  for (int16_t s : pcm) {
    const int step = kImaSteps[index];
    int diff = s - predictor;
    const int sign = diff < 0 ? 8 : 0;
    if (sign) diff = -diff;

    int code = 0;
    int vpdiff = step / 8;
    if (diff >= step) { code = 4; diff -= step; vpdiff += step; }
    if (diff >= step / 2) { code |= 2; diff -= step / 2; vpdiff += step / 2; }
    if (diff >= step / 4) { code |= 1; vpdiff += step / 4; }

    predictor = sign ? predictor - vpdiff : predictor + vpdiff;
    if (predictor > 32767) predictor = 32767;
    if (predictor < -32768) predictor = -32768;

    index += kImaIndexTable[code];
    if (index < 0) index = 0;
    if (index > 88) index = 88;

    out.codes.push_back(code | sign);
    out.decoded.push_back(predictor);
  }
  return out;
}

inline std::vector<int> ima_decode(const std::vector<int>& codes, int predictor = 0, int index = 0) {
  std::vector<int> out;
  for (int c : codes) {
    const int step = kImaSteps[index];
    int vpdiff = step >> 3;
    if (c & 4) vpdiff += step;
    if (c & 2) vpdiff += step >> 1;
    if (c & 1) vpdiff += step >> 2;
    predictor += (c & 8) ? -vpdiff : vpdiff;
    if (predictor > 32767) predictor = 32767;
    if (predictor < -32768) predictor = -32768;
    index += kImaIndexTable[c & 7];
    if (index < 0) index = 0;
    if (index > 88) index = 88;
    out.push_back(predictor);
  }
  return out;
}

}  // namespace oracle
