#include "bloomdtn/summary.hpp"

#include <algorithm>

namespace bloomdtn {

void IdWindow::detach() {
  if (seq_.use_count() > 1) seq_ = std::make_shared<ExactSet::SeqMap>(*seq_);
}

std::optional<std::uint32_t> IdWindow::push(std::uint32_t id) {
  if (seq_->contains(id)) return std::nullopt;
  std::optional<std::uint32_t> evicted;
  if (capacity_ != 0 && order_.size() >= capacity_) {
    detach();
    evicted = order_.front();
    seq_->erase(order_.front());
    order_.pop_front();
  }
  // Snapshots only see keys below their cutoff, so adding is always safe.
  seq_->emplace(id, next_seq_++);
  order_.push_back(id);
  ++version_;
  return evicted;
}

bool IdWindow::erase(std::uint32_t id) {
  if (!seq_->contains(id)) return false;
  detach();
  seq_->erase(id);
  order_.erase(std::find(order_.begin(), order_.end(), id));
  ++version_;
  return true;
}

void IdWindow::clear() {
  seq_ = std::make_shared<ExactSet::SeqMap>();
  order_.clear();
  ++version_;
}

ExactSet IdWindow::snapshot(std::size_t charged_bytes) const {
  return ExactSet(seq_, next_seq_, charged_bytes);
}

}  // namespace bloomdtn
