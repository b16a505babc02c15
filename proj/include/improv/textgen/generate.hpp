#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "improv/textgen/ngram_model.hpp"
#include "improv/textgen/token.hpp"
#include "improv/textgen/topic.hpp"

namespace improv::textgen {

inline constexpr std::size_t kDefaultMaxLen = 25;

/// Sampling distribution for one step: the model row with every topic word
/// scaled by exp(bonus * weight), renormalized. Indexed by TokenId.
std::vector<double> primed_distribution(const NGramModel& model, std::span<const TokenId> history,
                                        const TopicSet& topic);

/// Samples one sentence word by word. The history starts from the tail of the
/// context (falling back to the start-of-line history when the model never saw
/// that tail) and sampling stops at the boundary marker or after max_len
/// tokens. The end marker cannot be drawn first unless nothing else has mass.
/// A pure function of its arguments.
std::vector<Token> generate(const NGramModel& model, std::span<const Token> context,
                            const TopicSet& topic, std::uint64_t seed,
                            std::size_t max_len = kDefaultMaxLen);

/// History used as the starting point for generate().
NGramModel::History initial_history(const NGramModel& model, std::span<const Token> context);

}  // namespace improv::textgen
