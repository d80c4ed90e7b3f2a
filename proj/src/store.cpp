#include "phr/store.hpp"

#include <sodium.h>

#include <atomic>
#include <fstream>
#include <sstream>

#include "sodium_init.hpp"

namespace phr {

namespace fs = std::filesystem;

ContentId ContentId::of(ByteView blob) {
  ensure_sodium();
  ContentId id;
  crypto_hash_sha256(id.digest.data(), blob.data(), blob.size());
  return id;
}

std::string ContentId::hex() const { return to_hex(digest); }

ContentId ContentId::from_hex(std::string_view hex) {
  auto raw = phr::from_hex(hex);
  if (raw.size() != kBytes) throw Error(Errc::Length, "content id must be 32 bytes");
  ContentId id;
  std::copy(raw.begin(), raw.end(), id.digest.begin());
  return id;
}

// ---------------------------------------------------------------- memory

ContentId MemoryBlobStore::put(ByteView blob) {
  auto id = ContentId::of(blob);
  std::unique_lock lock(mu_);
  blobs_.try_emplace(id, blob.begin(), blob.end());
  return id;
}

Bytes MemoryBlobStore::get(const ContentId& id) const {
  Bytes blob;
  {
    std::shared_lock lock(mu_);
    auto it = blobs_.find(id);
    if (it == blobs_.end()) throw Error(Errc::NotFound, "no blob " + id.hex());
    blob = it->second;
  }
  if (ContentId::of(blob) != id) throw Error(Errc::DigestMismatch, "blob " + id.hex() + " is corrupted");
  return blob;
}

bool MemoryBlobStore::contains(const ContentId& id) const {
  std::shared_lock lock(mu_);
  return blobs_.contains(id);
}

std::size_t MemoryBlobStore::size() const {
  std::shared_lock lock(mu_);
  return blobs_.size();
}

// ---------------------------------------------------------------- directory

DirectoryBlobStore::DirectoryBlobStore(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw Error(Errc::Io, "cannot create store directory " + dir_.string() + ": " + ec.message());
}

fs::path DirectoryBlobStore::path_of(const ContentId& id) const { return dir_ / id.hex(); }

ContentId DirectoryBlobStore::put(ByteView blob) {
  static std::atomic<std::uint64_t> counter{0};
  auto id = ContentId::of(blob);
  auto target = path_of(id);
  if (fs::exists(target)) return id;

  auto tmp = dir_ / (".tmp-" + id.hex() + "-" + std::to_string(counter++));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(blob.data()), static_cast<std::streamsize>(blob.size()));
    if (!out) throw Error(Errc::Io, "write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(Errc::Io, "rename failed: " + target.string());
  }
  return id;
}

Bytes DirectoryBlobStore::get(const ContentId& id) const {
  auto file = path_of(id);
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(Errc::NotFound, "no blob " + id.hex());
  Bytes blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (ContentId::of(blob) != id) throw Error(Errc::DigestMismatch, "blob " + id.hex() + " is corrupted");
  return blob;
}

bool DirectoryBlobStore::contains(const ContentId& id) const { return fs::exists(path_of(id)); }

// ---------------------------------------------------------------- access list

AccessList::AccessList(AccessList&& other) noexcept {
  std::unique_lock lock(other.mu_);
  entries_ = std::move(other.entries_);
}

AccessList& AccessList::operator=(AccessList&& other) noexcept {
  if (this != &other) {
    std::scoped_lock lock(mu_, other.mu_);
    entries_ = std::move(other.entries_);
  }
  return *this;
}

void AccessList::register_access(ByteView data_id, const ContentId& address, const IdElem& owner_pk) {
  Bytes key(data_id.begin(), data_id.end());
  std::unique_lock lock(mu_);
  auto [it, inserted] = entries_.try_emplace(key, AccessListEntry{key, address, owner_pk});
  if (!inserted) throw Error(Errc::DuplicateDataId, "data id " + to_hex(data_id) + " already registered");
}

AccessListEntry AccessList::lookup_access(ByteView data_id) const {
  std::shared_lock lock(mu_);
  auto it = entries_.find(Bytes(data_id.begin(), data_id.end()));
  if (it == entries_.end()) throw Error(Errc::UnknownDataId, "data id " + to_hex(data_id) + " not registered");
  return it->second;
}

std::size_t AccessList::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

std::vector<AccessListEntry> AccessList::entries() const {
  std::shared_lock lock(mu_);
  std::vector<AccessListEntry> out;
  out.reserve(entries_.size());
  for (const auto& [_, e] : entries_) out.push_back(e);
  return out;
}

void AccessList::save(const fs::path& file) const {
  std::ostringstream body;
  for (const auto& e : entries())
    body << to_hex(e.data_id) << ' ' << e.address.hex() << ' ' << to_hex(e.owner_pk.to_bytes()) << '\n';
  std::ofstream out(file, std::ios::trunc);
  out << body.str();
  if (!out) throw Error(Errc::Io, "cannot write access list " + file.string());
}

AccessList AccessList::load(const fs::path& file) {
  AccessList list;
  std::ifstream in(file);
  if (!in) return list;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string data_id, digest, owner;
    if (!(fields >> data_id >> digest >> owner))
      throw Error(Errc::Decode, file.string() + ":" + std::to_string(lineno) + ": expected three fields");
    list.register_access(from_hex(data_id), ContentId::from_hex(digest), IdElem::from_bytes(from_hex(owner)));
  }
  return list;
}

}  // namespace phr
