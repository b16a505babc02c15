#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "improv/textgen/generate.hpp"
#include "improv/textgen/ngram_model.hpp"
#include "improv/textgen/token.hpp"
#include "improv/textgen/topic.hpp"

namespace improv::textgen {

/// What the show machinery needs from a dialogue generator. Implementations
/// must be safe to call concurrently from several threads.
class LanguageBackend {
 public:
  virtual ~LanguageBackend() = default;

  virtual std::vector<Token> generate(std::span<const Token> context, const TopicSet& topic,
                                      std::uint64_t seed, std::size_t max_len) const = 0;
  virtual double score(std::span<const Token> sentence) const = 0;
  virtual TopicSet prime(std::span<const std::string> seeds, std::size_t k, double bonus) const = 0;
};

class NGramBackend final : public LanguageBackend {
 public:
  explicit NGramBackend(std::shared_ptr<const NGramModel> model,
                        std::set<std::string> stopwords = function_words())
      : model_(std::move(model)), stopwords_(std::move(stopwords)) {}

  std::vector<Token> generate(std::span<const Token> context, const TopicSet& topic,
                              std::uint64_t seed, std::size_t max_len) const override {
    return textgen::generate(*model_, context, topic, seed, max_len);
  }

  double score(std::span<const Token> sentence) const override { return model_->score(sentence); }

  TopicSet prime(std::span<const std::string> seeds, std::size_t k, double bonus) const override {
    return expand_topic(*model_, seeds, k, bonus, stopwords_);
  }

  const NGramModel& model() const { return *model_; }

 private:
  std::shared_ptr<const NGramModel> model_;
  std::set<std::string> stopwords_;
};

}  // namespace improv::textgen
