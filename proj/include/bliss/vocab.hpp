#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace bliss {

// Token/id bijection with the five reserved specials at ids 0..4.
class Vocabulary {
  public:
    static constexpr int pad_id = 0;
    static constexpr int bos_id = 1;
    static constexpr int eos_id = 2;
    static constexpr int unk_id = 3;
    static constexpr int blank_id = 4;
    static constexpr int n_specials = 5;

    Vocabulary();  // specials only

    // synthetic vocabulary of total size v: specials plus content tokens "w5".."w{v-1}"
    static Vocabulary for_size(int v);

    // frequency-sorted vocabulary from whitespace-tokenized text files; ties
    // broken lexicographically; empty lines are skipped and counted
    static Vocabulary build(const std::vector<std::string>& paths, int64_t* skipped_lines = nullptr);

    int add_token(const std::string& token);  // returns id; re-adding returns existing id
    int size() const { return static_cast<int>(tokens_.size()); }
    int content_count() const { return size() - n_specials; }
    const std::string& token(int id) const;
    int id_of(const std::string& token) const;  // unk_id if absent
    bool contains(const std::string& token) const;

    std::vector<int> encode_line(const std::string& line) const;
    std::string decode_ids(const std::vector<int>& ids) const;

    void save(const std::string& path) const;
    static Vocabulary load(const std::string& path);

  private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> index_;
};

}  // namespace bliss
