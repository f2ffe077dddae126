// SPDX-License-Identifier: Apache-2.0
#include "inventory.h"

namespace shop {

int Inventory::Restock(const std::string& sku, int amount) {
  TRACE_EVENT("shop", "Inventory::Restock");
  if (amount <= 0) {
    LOG(WARNING) << "ignoring restock of " << amount;
    return 0;
  }
  Item* item = Find(sku);
  if (item == nullptr) {
    VLOG(1) << "new sku " << sku;
    items_.push_back(Item{sku, amount, 0});
    metrics_->skus->Set(items_.size());
    return amount;
  }
  item->count += amount;
  restocks_++;
  metrics_->restocks->Increment();
  VLOG(2) << sku << " now " << item->count;
  return item->count;
}

int Inventory::Reserve(const std::string& sku, int amount) {
  DCHECK_GT(amount, 0);
  Item* item = Find(sku);
  if (item == nullptr || item->count - item->reserved < amount) {
    LOG(INFO) << "cannot reserve " << amount << " of " << sku;
    metrics_->reserve_failures->Increment();
    return -1;
  }
  item->reserved += amount;
  return item->count - item->reserved;
}

int Inventory::TotalValue(int unit_price) const {
  DCHECK_GE(unit_price, 0);
  int total = 0;
  for (const Item& item : items_) {
    total += item.count * unit_price;
  }
  VLOG(3) << "total value " << total;
  return total;
}

}  // namespace shop
