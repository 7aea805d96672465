#pragma once

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "crowdrel/corpus.hpp"

namespace testutil {

// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    dir_ = std::filesystem::temp_directory_path() /
           ("crowdrel_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    std::filesystem::create_directories(dir_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(dir_, ec);
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

 private:
  std::filesystem::path dir_;
};

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::trunc);
  out << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  return content;
}

inline crowdrel::Sentence sentence(const std::string& id, const std::string& text,
                                   const std::string& term1,
                                   const std::string& term2) {
  return {id, text, term1, term2};
}

inline crowdrel::Judgment judgment(const std::string& sid, const std::string& wid,
                                   std::vector<std::string> selected) {
  return {sid, wid, std::move(selected)};
}

// Random corpus over generic relation names: every worker judges every
// sentence, selecting each relation independently (empty selection -> NONE).
inline crowdrel::AnnotationCorpus random_corpus(std::mt19937_64& rng,
                                                int max_sentences = 20,
                                                int max_relations = 5,
                                                int max_workers = 7) {
  using namespace crowdrel;
  int n_rel = 1 + static_cast<int>(rng() % max_relations);
  int n_sent = 1 + static_cast<int>(rng() % max_sentences);
  int n_work = 1 + static_cast<int>(rng() % max_workers);
  std::vector<std::string> relations;
  for (int r = 0; r < n_rel; ++r) relations.push_back("rel" + std::to_string(r));

  AnnotationCorpus corpus;
  corpus.taxonomy = RelationTaxonomy(relations);
  for (int s = 0; s < n_sent; ++s) {
    std::string sid = "s" + std::to_string(s);
    corpus.sentences.push_back(
        sentence(sid, "tok a tok b t" + std::to_string(s), "tok a", "tok b"));
    for (int w = 0; w < n_work; ++w) {
      Judgment j;
      j.sentence_id = sid;
      j.worker_id = "w" + std::to_string(w);
      for (int r = 0; r < n_rel; ++r) {
        if (rng() % 10 < 3) j.selected.push_back(relations[r]);
      }
      corpus.judgments.push_back(std::move(j));
    }
  }
  return corpus;
}

}  // namespace testutil
