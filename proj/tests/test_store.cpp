#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "phr/store.hpp"

using namespace phr;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    auto rng = Rng::system();
    path = fs::temp_directory_path() / ("phr-store-" + to_hex(rng.bytes(8)));
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::Io;
}

void exercise(BlobStore& store) {
  auto a = store.put(as_bytes("record one"));
  auto again = store.put(as_bytes("record one"));
  auto b = store.put(as_bytes("record two"));
  CHECK(a == again);
  CHECK(a != b);
  CHECK(store.contains(a));
  CHECK(store.get(a) == to_bytes("record one"));
  CHECK(store.get(b) == to_bytes("record two"));
  auto missing = ContentId::of(as_bytes("never stored"));
  CHECK_FALSE(store.contains(missing));
  CHECK(code_of([&] { store.get(missing); }) == Errc::NotFound);
  auto empty = store.put(ByteView{});
  CHECK(store.get(empty).empty());
}

}  // namespace

TEST_CASE("content id is SHA-256 of the blob") {
  // SHA-256("abc")
  CHECK(ContentId::of(as_bytes("abc")).hex() == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  auto id = ContentId::of(as_bytes("x"));
  CHECK(ContentId::from_hex(id.hex()) == id);
  CHECK(code_of([] { ContentId::from_hex("abcd"); }) == Errc::Length);
  CHECK(code_of([] { ContentId::from_hex("zz"); }) == Errc::Decode);
}

TEST_CASE("memory store") {
  MemoryBlobStore store;
  exercise(store);
  CHECK(store.size() == 3);
}

TEST_CASE("directory store") {
  TempDir tmp;
  DirectoryBlobStore store(tmp.path);
  exercise(store);

  SUBCASE("survives reopening") {
    auto id = store.put(as_bytes("persisted"));
    DirectoryBlobStore reopened(tmp.path);
    CHECK(reopened.get(id) == to_bytes("persisted"));
  }
  SUBCASE("detects corruption on read") {
    auto id = store.put(as_bytes("will be corrupted"));
    {
      std::ofstream out(store.path_of(id), std::ios::binary | std::ios::trunc);
      out << "tampered";
    }
    CHECK(code_of([&] { store.get(id); }) == Errc::DigestMismatch);
  }
}

TEST_CASE("access list") {
  const auto& ctx = PairingCtx::standard();
  AccessList list;
  auto addr = ContentId::of(as_bytes("blob"));
  list.register_access(as_bytes("Data_1"), addr, ctx.h);
  CHECK(list.size() == 1);
  auto e = list.lookup_access(as_bytes("Data_1"));
  CHECK(e.address == addr);
  CHECK(e.owner_pk == ctx.h);
  CHECK(code_of([&] { list.register_access(as_bytes("Data_1"), addr, ctx.h); }) == Errc::DuplicateDataId);
  CHECK(code_of([&] { list.lookup_access(as_bytes("Data_2")); }) == Errc::UnknownDataId);

  TempDir tmp;
  fs::create_directories(tmp.path);
  auto file = tmp.path / "access.list";
  list.register_access(as_bytes("Data_2"), ContentId::of(as_bytes("other")), ctx.h.pow(Scalar::from_u64(7)));
  list.save(file);
  auto loaded = AccessList::load(file);
  CHECK(loaded.entries() == list.entries());
  CHECK(AccessList::load(tmp.path / "absent").size() == 0);

  {
    std::ofstream out(file, std::ios::app);
    out << "deadbeef\n";
  }
  CHECK(code_of([&] { AccessList::load(file); }) == Errc::Decode);
}
