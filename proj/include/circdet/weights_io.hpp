// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The circdet Authors.
#pragma once

#include <filesystem>

#include "circdet/decoder.hpp"
#include "circdet/formats.hpp"

namespace circdet {

/// Flattens a decoder bundle into named tensors. Keys:
///
///   meta                          1x1x5  [D, heads, points, layers, PE temperature]
///   {pos_mlp,csq_mlp,ref_mlp,delta_head}.<i>.weight   out x in x 1
///   {pos_mlp,csq_mlp,ref_mlp,delta_head}.<i>.bias     out x 1 x 1
///   score.weight                  D x 1 x 1
///   score.bias                    1 x 1 x 1
///   layer<l>.{self_q,self_k,self_v,self_out,cross_out,attn_proj}   rows x cols x 1
///   layer<l>.ffn.<i>.{weight,bias}
///   layer<l>.attn_bias            MK x 1 x 1
///   layer<l>.value_proj.<m>       d x D x 1
///   layer<l>.output_proj.<m>      D x d x 1
///   layer<l>.offsets              MK x 2 x 1  [radius, angle]
///
/// Values are stored as float32.
NamedTensors decoder_weights_to_tensors(const DecoderWeights& w);

/// Inverse of decoder_weights_to_tensors. Throws FormatError for missing keys
/// and ShapeError for inconsistent shapes.
DecoderWeights decoder_weights_from_tensors(const NamedTensors& tensors);

void save_decoder_weights(const std::filesystem::path& path, const DecoderWeights& w);
DecoderWeights load_decoder_weights(const std::filesystem::path& path);

}  // namespace circdet
