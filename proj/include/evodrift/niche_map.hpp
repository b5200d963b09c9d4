#pragma once

// Open-addressing map from a packed niche key to a small value, tuned for the
// per-generation admission loop of the niched models. Entries are invalidated
// in O(1) by bumping an epoch stamp instead of clearing storage.

#include <cstdint>
#include <vector>

namespace evodrift {

inline std::uint64_t pack_niche(std::int32_t x, std::int32_t y) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)) << 32) |
           static_cast<std::uint64_t>(static_cast<std::uint32_t>(y));
}

inline std::int32_t niche_x(std::uint64_t key) {
    return static_cast<std::int32_t>(static_cast<std::uint32_t>(key >> 32));
}

inline std::int32_t niche_y(std::uint64_t key) {
    return static_cast<std::int32_t>(static_cast<std::uint32_t>(key));
}

template <typename V>
class NicheMap {
  public:
    NicheMap() { rehash(1024); }

    void clear() {
        ++epoch_;
        size_ = 0;
        if (epoch_ == 0) {  // stamp wrapped; storage must be reset for real
            for (auto& s : slots_) s.epoch = 0;
            epoch_ = 1;
        }
    }

    // Insert-or-find; fresh entries start value-initialized.
    V& operator[](std::uint64_t key) {
        if (size_ * 10 >= slots_.size() * 7) rehash(slots_.size() * 2);
        std::size_t i = probe_start(key);
        for (;;) {
            Slot& s = slots_[i];
            if (s.epoch != epoch_) {
                s.epoch = epoch_;
                s.key = key;
                s.value = V{};
                ++size_;
                return s.value;
            }
            if (s.key == key) return s.value;
            i = (i + 1) & mask_;
        }
    }

    std::size_t size() const { return size_; }

    template <typename Fn>
    void for_each(Fn&& fn) const {
        for (const auto& s : slots_) {
            if (s.epoch == epoch_) fn(s.key, s.value);
        }
    }

  private:
    struct Slot {
        std::uint64_t key = 0;
        std::uint32_t epoch = 0;
        V value{};
    };

    std::size_t probe_start(std::uint64_t key) const {
        return static_cast<std::size_t>((key * 0x9E3779B97F4A7C15ull) >> shift_) & mask_;
    }

    void rehash(std::size_t capacity) {
        std::vector<Slot> old = std::move(slots_);
        slots_.assign(capacity, Slot{});
        mask_ = capacity - 1;
        shift_ = 64;
        for (std::size_t c = capacity; c > 1; c >>= 1) --shift_;
        const std::uint32_t live = epoch_;
        epoch_ = 1;
        size_ = 0;
        for (auto& s : old) {
            if (s.epoch == live) {
                std::size_t i = probe_start(s.key);
                while (slots_[i].epoch == epoch_) i = (i + 1) & mask_;
                slots_[i].epoch = epoch_;
                slots_[i].key = s.key;
                slots_[i].value = s.value;
                ++size_;
            }
        }
    }

    std::vector<Slot> slots_;
    std::size_t mask_ = 0;
    int shift_ = 64;
    std::uint32_t epoch_ = 1;
    std::size_t size_ = 0;
};

}  // namespace evodrift
