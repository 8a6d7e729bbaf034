#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "radner/core/document.hpp"

namespace radner {

enum class CorpusFormat { conll, jsonl };

// Picks the format from the file extension (.conll / .jsonl); throws FormatError otherwise.
CorpusFormat format_from_path(const std::filesystem::path& path);

struct CorpusIoOptions {
  // Annotation source carried by the CoNLL label column.
  std::string conll_source = "gold";
};

Corpus read_corpus(const std::filesystem::path& path, CorpusFormat format, const CorpusIoOptions& options = {});
Corpus read_corpus(std::istream& in, CorpusFormat format, const std::string& name,
                   const CorpusIoOptions& options = {});

void write_corpus(const Corpus& corpus, const std::filesystem::path& path, CorpusFormat format,
                  const CorpusIoOptions& options = {});
void write_corpus(const Corpus& corpus, std::ostream& out, CorpusFormat format, const CorpusIoOptions& options = {});

}  // namespace radner
