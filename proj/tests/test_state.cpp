// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>

#include "keri/controller.hpp"
#include "keri/state.hpp"

using namespace keri;

namespace {

KeyBank det_bank(std::uint8_t tag) {
  std::array<std::uint8_t, 32> seed{};
  seed.fill(tag);
  return KeyBank(seed);
}

ApplyOutcome feed(Processor& p, const SignedEvent& msg) {
  return p.apply(msg.bytes, msg.signatures);
}

std::string witness_prefix(std::uint8_t tag) {
  return det_bank(tag).qualified_public(0, /*transferable=*/false);
}

}  // namespace

TEST_CASE("inception accepted from empty state") {
  Controller c = Controller::incept(det_bank(1));
  Processor p;
  const ApplyOutcome out = feed(p, c.inception());
  CHECK(out.disposition == Disposition::AcceptedFirstSeen);
  REQUIRE(p.state(c.prefix()) != nullptr);
  CHECK(p.state(c.prefix())->sn == 0);
  CHECK(p.state(c.prefix())->keys == c.inception().event.keys);
}

TEST_CASE("inception with wrong prefix binding is rejected") {
  Controller c = Controller::incept(det_bank(2));
  KeyEvent tampered = c.inception().event;
  tampered.toad = 3;  // digest no longer matches the self-addressing prefix
  tampered.wits = {witness_prefix(71), witness_prefix(72), witness_prefix(73)};
  const auto bytes = serialize(tampered, SerKind::JSON);
  Processor p;
  const auto out = p.apply(bytes, c.sign(bytes));
  CHECK(out.disposition == Disposition::Rejected);
  CHECK(out.reason == "prefix-binding");
}

TEST_CASE("lifecycle: inception, rotations, interaction") {
  Controller c = Controller::incept(det_bank(3));
  Processor p;
  REQUIRE(feed(p, c.inception()).disposition == Disposition::AcceptedFirstSeen);

  const SignedEvent rot1 = c.rotate();
  REQUIRE(feed(p, rot1).disposition == Disposition::AcceptedFirstSeen);
  const SignedEvent ixn2 = c.interact({DigestSeal{"E" + std::string(43, 'X')}});
  REQUIRE(feed(p, ixn2).disposition == Disposition::AcceptedFirstSeen);
  const SignedEvent rot3 = c.rotate();
  REQUIRE(feed(p, rot3).disposition == Disposition::AcceptedFirstSeen);

  const KeyState* s = p.state(c.prefix());
  REQUIRE(s);
  CHECK(s->sn == 3);
  CHECK(s->last_est_sn == 3);
  CHECK(s->keys == rot3.event.keys);
  CHECK(p.trunk(c.prefix()).size() == 4);
}

TEST_CASE("rotation that does not match the commitment is rejected") {
  Controller c = Controller::incept(det_bank(4));
  Processor p;
  REQUIRE(feed(p, c.inception()).disposition == Disposition::AcceptedFirstSeen);

  SignedEvent rot = c.rotate();
  KeyEvent forged = rot.event;
  forged.keys = {det_bank(99).qualified_public(0)};  // not the committed set
  const auto bytes = serialize(forged, SerKind::JSON);
  // Signed by the forged key so the signature itself verifies.
  const auto kp = det_bank(99).key(0);
  const auto raw = crypto::ed25519_sign(kp.secret_key, bytes);
  const ApplyOutcome out =
      p.apply(bytes, {IndexedSignature{"A", 0, {raw.begin(), raw.end()}}});
  CHECK(out.disposition == Disposition::Rejected);
  CHECK(out.reason == "pre-rotation-mismatch");

  // The genuine rotation still goes through.
  CHECK(feed(p, rot).disposition == Disposition::AcceptedFirstSeen);
}

TEST_CASE("bad signature and unmet threshold paths") {
  Controller c = Controller::incept(det_bank(5));
  Processor p;
  REQUIRE(feed(p, c.inception()).disposition == Disposition::AcceptedFirstSeen);

  SignedEvent ixn = c.interact({});
  SUBCASE("flipped signature byte") {
    auto sigs = ixn.signatures;
    sigs[0].raw[10] ^= 1;
    const auto out = p.apply(ixn.bytes, sigs);
    CHECK(out.disposition == Disposition::Rejected);
    CHECK(out.reason == "bad-signature");
  }
  SUBCASE("no signatures at all") {
    const auto out = p.apply(ixn.bytes, {});
    CHECK(out.disposition == Disposition::Rejected);
    CHECK(out.reason == "threshold-unmet");
  }
  SUBCASE("signature index out of range") {
    auto sigs = ixn.signatures;
    sigs[0].index = 5;
    const auto out = p.apply(ixn.bytes, sigs);
    CHECK(out.disposition == Disposition::Rejected);
    CHECK(out.reason == "bad-signature");
  }
}

TEST_CASE("first seen wins: conflicting versions are duplicitous") {
  Controller c = Controller::incept(det_bank(6));
  Processor p;
  REQUIRE(feed(p, c.inception()).disposition == Disposition::AcceptedFirstSeen);

  Controller fork = c;  // same keys: a duplicitous controller
  const SignedEvent a = c.interact({DigestSeal{"E" + std::string(43, 'A')}});
  const SignedEvent b = fork.interact({DigestSeal{"E" + std::string(43, 'B')}});
  REQUIRE(a.bytes != b.bytes);

  REQUIRE(feed(p, a).disposition == Disposition::AcceptedFirstSeen);
  const std::string digest_before = p.state(c.prefix())->digest;

  const ApplyOutcome dup = feed(p, b);
  CHECK(dup.disposition == Disposition::Duplicitous);
  CHECK(p.state(c.prefix())->digest == digest_before);  // state unchanged
  REQUIRE(p.duplicity().size() == 1);
  CHECK(p.duplicity()[0].sn == 1);

  // Byte-identical redelivery stays idempotent.
  CHECK(feed(p, a).disposition == Disposition::DuplicateIdentical);
}

TEST_CASE("superseding recovery forks off the exploited tail") {
  // Events 0..6: icp, ixn, ixn, ixn, rot, ixn, ixn. The signing keys exposed
  // at event 4 are then compromised; the attacker extends with ixn 7, 8, 9.
  Controller c = Controller::incept(det_bank(7));
  Processor p;
  REQUIRE(feed(p, c.inception()).disposition == Disposition::AcceptedFirstSeen);
  for (int i = 0; i < 3; ++i) {
    REQUIRE(feed(p, c.interact({})).disposition == Disposition::AcceptedFirstSeen);
  }
  REQUIRE(feed(p, c.rotate()).disposition == Disposition::AcceptedFirstSeen);
  for (int i = 0; i < 2; ++i) {
    REQUIRE(feed(p, c.interact({})).disposition == Disposition::AcceptedFirstSeen);
  }
  REQUIRE(p.state(c.prefix())->sn == 6);

  Controller attacker = c;  // compromised current signing keys
  for (int i = 0; i < 3; ++i) {
    const auto out = feed(p, attacker.interact({DigestSeal{"E" + std::string(43, 'Z')}}));
    REQUIRE(out.disposition == Disposition::AcceptedFirstSeen);
  }
  REQUIRE(p.state(c.prefix())->sn == 9);

  // The controller recovers with a rotation at sn 7.
  const SignedEvent recovery = c.rotate();
  REQUIRE(recovery.event.sn == 7);
  const ApplyOutcome out = feed(p, recovery);
  CHECK(out.disposition == Disposition::SupersedingRecovery);
  CHECK(out.disputed_sns == std::vector<std::uint64_t>{7, 8, 9});

  const KeyState* s = p.state(c.prefix());
  CHECK(s->sn == 7);
  CHECK(s->last_est_sn == 7);
  CHECK(s->keys == recovery.event.keys);
  CHECK(p.trunk(c.prefix()).size() == 8);
  CHECK(p.disputed(c.prefix()).size() == 3);

  // Nothing further is accepted on the disputed branch.
  const auto tail = feed(p, attacker.interact({}));
  CHECK(tail.disposition == Disposition::Rejected);

  // The trunk continues normally from the recovery rotation.
  CHECK(feed(p, c.interact({})).disposition == Disposition::AcceptedFirstSeen);
}

TEST_CASE("interaction never supersedes rotation; rotation never supersedes rotation") {
  Controller c = Controller::incept(det_bank(8));
  Processor p;
  REQUIRE(feed(p, c.inception()).disposition == Disposition::AcceptedFirstSeen);
  Controller fork = c;
  REQUIRE(feed(p, c.rotate()).disposition == Disposition::AcceptedFirstSeen);

  SUBCASE("conflicting interaction at the rotation's location") {
    const SignedEvent ixn = fork.interact({});
    const auto out = feed(p, ixn);
    CHECK(out.disposition == Disposition::Duplicitous);
    CHECK(p.state(c.prefix())->last_est_sn == 1);
  }
  SUBCASE("conflicting rotation at the rotation's location") {
    Controller::RotationSpec spec;
    spec.next_count = 2;  // different next commitment, same unhidden keys
    const SignedEvent rot2 = fork.rotate(spec);
    const auto out = feed(p, rot2);
    CHECK(out.disposition == Disposition::Duplicitous);
  }
}

TEST_CASE("out-of-order escrow drains in sequence order") {
  Controller c = Controller::incept(det_bank(9));
  Processor p;
  REQUIRE(feed(p, c.inception()).disposition == Disposition::AcceptedFirstSeen);

  const SignedEvent e1 = c.interact({});
  const SignedEvent e2 = c.interact({});
  const SignedEvent e3 = c.rotate();

  CHECK(feed(p, e3).disposition == Disposition::EscrowedOutOfOrder);
  CHECK(feed(p, e2).disposition == Disposition::EscrowedOutOfOrder);
  CHECK(p.escrowed_out_of_order() == 2);
  CHECK(p.state(c.prefix())->sn == 0);

  const ApplyOutcome out = feed(p, e1);
  CHECK(out.disposition == Disposition::AcceptedFirstSeen);
  CHECK(out.flushed == 2);
  CHECK(p.state(c.prefix())->sn == 3);
  CHECK(p.escrowed_out_of_order() == 0);
}

TEST_CASE("multi-sig partial escrow accumulates signatures") {
  ControllerConfig cfg;
  cfg.key_count = 3;
  cfg.next_count = 3;
  cfg.sith = SigningThreshold::integer(2);
  Controller c = Controller::incept(det_bank(10), cfg);
  Processor p;

  const SignedEvent icp = c.inception();
  REQUIRE(icp.signatures.size() == 3);

  const auto partial = p.apply(icp.bytes, {icp.signatures[0]});
  CHECK(partial.disposition == Disposition::EscrowedPartialSig);
  CHECK(p.state(c.prefix()) == nullptr);
  CHECK(p.escrowed_partial_sig() == 1);

  // A second partial delivery of the identical bytes completes the set.
  const auto done = p.apply(icp.bytes, {icp.signatures[1]});
  CHECK(done.disposition == Disposition::AcceptedFirstSeen);
  REQUIRE(p.state(c.prefix()));
  CHECK(p.trunk(c.prefix())[0].sigs.size() == 2);
  CHECK(p.escrowed_partial_sig() == 0);
}

TEST_CASE("witness set algebra on rotation") {
  const std::vector<std::string> wits = {witness_prefix(50), witness_prefix(51),
                                         witness_prefix(52), witness_prefix(53)};
  ControllerConfig cfg;
  cfg.witnesses = wits;
  cfg.toad = 3;
  Controller c = Controller::incept(det_bank(11), cfg);
  Processor p;
  REQUIRE(feed(p, c.inception()).disposition == Disposition::AcceptedFirstSeen);

  SUBCASE("prune one, graft one: four witnesses remain") {
    Controller::RotationSpec spec;
    spec.cuts = {wits[1]};
    spec.adds = {witness_prefix(54)};
    spec.toad = 3;
    const auto out = feed(p, c.rotate(spec));
    CHECK(out.disposition == Disposition::AcceptedFirstSeen);
    const KeyState* s = p.state(c.prefix());
    CHECK(s->witnesses ==
          std::vector<std::string>{wits[0], wits[2], wits[3], witness_prefix(54)});
    CHECK(s->toad == 3);
  }
  SUBCASE("cutting a non-member is rejected") {
    Controller::RotationSpec spec;
    spec.cuts = {witness_prefix(77)};
    const auto out = feed(p, c.rotate(spec));
    CHECK(out.disposition == Disposition::Rejected);
    CHECK(out.reason == "cut-not-a-witness");
  }
  SUBCASE("tally above the resulting set is rejected") {
    Controller::RotationSpec spec;
    spec.cuts = {wits[0], wits[1]};
    spec.toad = 3;
    const auto out = feed(p, c.rotate(spec));
    CHECK(out.disposition == Disposition::Rejected);
    CHECK(out.reason == "tally-exceeds-witnesses");
  }
}

TEST_CASE("key indexing follows the partial sums of consumed set sizes") {
  // Set sizes 1, 3, 3, 4 give starting indices 0, 1, 4, 7 and 11 next.
  ControllerConfig cfg;
  cfg.key_count = 1;
  cfg.next_count = 3;
  Controller c = Controller::incept(det_bank(12), cfg);
  Processor p;
  REQUIRE(feed(p, c.inception()).disposition == Disposition::AcceptedFirstSeen);
  CHECK(p.state(c.prefix())->first_key_index == 0);

  Controller::RotationSpec spec;
  spec.next_count = 3;
  REQUIRE(feed(p, c.rotate(spec)).disposition == Disposition::AcceptedFirstSeen);
  CHECK(p.state(c.prefix())->first_key_index == 1);

  spec.next_count = 4;
  REQUIRE(feed(p, c.rotate(spec)).disposition == Disposition::AcceptedFirstSeen);
  CHECK(p.state(c.prefix())->first_key_index == 4);

  spec.next_count = 1;
  REQUIRE(feed(p, c.rotate(spec)).disposition == Disposition::AcceptedFirstSeen);
  CHECK(p.state(c.prefix())->first_key_index == 7);

  REQUIRE(feed(p, c.rotate(spec)).disposition == Disposition::AcceptedFirstSeen);
  CHECK(p.state(c.prefix())->first_key_index == 11);
}

TEST_CASE("abandonment: rotation to a null next set ends the log") {
  Controller c = Controller::incept(det_bank(13));
  Processor p;
  REQUIRE(feed(p, c.inception()).disposition == Disposition::AcceptedFirstSeen);

  Controller::RotationSpec spec;
  spec.next_count = 0;
  REQUIRE(feed(p, c.rotate(spec)).disposition == Disposition::AcceptedFirstSeen);
  CHECK(p.state(c.prefix())->next_digest.empty());

  // The controller itself refuses, so forge the attempt directly.
  Controller zombie = c;
  CHECK_THROWS_AS(zombie.interact({}), std::logic_error);
  KeyEvent ixn;
  ixn.prefix = c.prefix();
  ixn.sn = 2;
  ixn.prior_digest = c.latest_digest();
  ixn.ilk = Ilk::ixn;
  const auto bytes = serialize(ixn, SerKind::JSON);
  const auto out = p.apply(bytes, c.sign(bytes));
  CHECK(out.disposition == Disposition::Rejected);
  CHECK(out.reason == "abandoned-identifier");
}

TEST_CASE("non-transferable basic prefix admits only its inception") {
  ControllerConfig cfg;
  cfg.prefix_class = PrefixClass::Basic;
  cfg.next_count = 0;
  Controller c = Controller::incept(det_bank(14), cfg);
  CHECK(c.prefix()[0] == 'B');
  Processor p;
  REQUIRE(feed(p, c.inception()).disposition == Disposition::AcceptedFirstSeen);

  KeyEvent ixn;
  ixn.prefix = c.prefix();
  ixn.sn = 1;
  ixn.prior_digest = c.latest_digest();
  ixn.ilk = Ilk::ixn;
  const auto bytes = serialize(ixn, SerKind::JSON);
  const auto out = p.apply(bytes, c.sign(bytes));
  CHECK(out.disposition == Disposition::Rejected);
  CHECK(out.reason == "abandoned-identifier");
}

TEST_CASE("EstOnly trait blocks interaction events") {
  ControllerConfig cfg;
  cfg.config_traits = {"EstOnly"};
  Controller c = Controller::incept(det_bank(15), cfg);
  Processor p;
  REQUIRE(feed(p, c.inception()).disposition == Disposition::AcceptedFirstSeen);
  Controller misbehaving = c;
  const auto out = feed(p, misbehaving.interact({}));
  CHECK(out.disposition == Disposition::Rejected);
  CHECK(out.reason == "est-only-violation");
  CHECK(feed(p, c.rotate()).disposition == Disposition::AcceptedFirstSeen);
}

TEST_CASE("cooperative delegation") {
  Controller delegator = Controller::incept(det_bank(16));
  Processor p;
  REQUIRE(feed(p, delegator.inception()).disposition == Disposition::AcceptedFirstSeen);

  SUBCASE("inception via delegating interaction") {
    std::optional<Controller> delegate;
    const DelegationPair pair = delegate_inception(delegator, det_bank(17), ControllerConfig{},
                                                   DelegationKind::Interaction, delegate);
    REQUIRE(delegate.has_value());
    REQUIRE(feed(p, pair.delegating).disposition == Disposition::AcceptedFirstSeen);
    const auto out = feed(p, pair.delegated);
    CHECK(out.disposition == Disposition::AcceptedFirstSeen);
    REQUIRE(p.state(delegate->prefix()));
    CHECK(p.state(delegate->prefix())->delegator == delegator.prefix());
  }
  SUBCASE("inception via extended delegating rotation") {
    std::optional<Controller> delegate;
    const DelegationPair pair = delegate_inception(delegator, det_bank(18), ControllerConfig{},
                                                   DelegationKind::Rotation, delegate);
    REQUIRE(feed(p, pair.delegating).disposition == Disposition::AcceptedFirstSeen);
    CHECK(pair.delegating.event.ilk == Ilk::rot);
    CHECK(feed(p, pair.delegated).disposition == Disposition::AcceptedFirstSeen);
  }
  SUBCASE("seal digest mismatch is rejected") {
    std::optional<Controller> delegate;
    DelegationPair pair = delegate_inception(delegator, det_bank(19), ControllerConfig{},
                                             DelegationKind::Interaction, delegate);
    REQUIRE(feed(p, pair.delegating).disposition == Disposition::AcceptedFirstSeen);
    // Perturb the delegated event so its digest no longer matches the anchor.
    KeyEvent altered = pair.delegated.event;
    altered.cnfg = {"EstOnly"};
    const auto bytes = serialize(altered, SerKind::JSON);
    const auto out = p.apply(bytes, delegate->sign(bytes));
    CHECK(out.disposition == Disposition::Rejected);
    // The prefix no longer matches either; both reasons are legitimate.
    CHECK((out.reason == "seal-mismatch" || out.reason == "prefix-binding"));
  }
  SUBCASE("two delegations can share one delegating event's seal list") {
    // Build both delegated inceptions against the same pending location.
    const LocationSeal location{delegator.prefix(), delegator.sn() + 1, Ilk::ixn,
                                delegator.latest_digest()};
    ControllerConfig dc;
    Controller d1 = Controller::incept(det_bank(20), dc, location);
    Controller d2 = Controller::incept(det_bank(21), dc, location);
    const EventSeal a1{d1.prefix(), 0, encode(digest_event(d1.inception().bytes, "E"))};
    const EventSeal a2{d2.prefix(), 0, encode(digest_event(d2.inception().bytes, "E"))};
    const SignedEvent delegating = delegator.interact({Seal{a1}, Seal{a2}});
    REQUIRE(feed(p, delegating).disposition == Disposition::AcceptedFirstSeen);
    CHECK(feed(p, d1.inception()).disposition == Disposition::AcceptedFirstSeen);
    CHECK(feed(p, d2.inception()).disposition == Disposition::AcceptedFirstSeen);
  }
}

TEST_CASE("delegated rotation and nested recovery authority") {
  Processor p;
  Controller delegator = Controller::incept(det_bank(22));
  REQUIRE(feed(p, delegator.inception()).disposition == Disposition::AcceptedFirstSeen);

  std::optional<Controller> delegate;
  const DelegationPair inception = delegate_inception(
      delegator, det_bank(23), ControllerConfig{}, DelegationKind::Interaction, delegate);
  REQUIRE(feed(p, inception.delegating).disposition == Disposition::AcceptedFirstSeen);
  REQUIRE(feed(p, inception.delegated).disposition == Disposition::AcceptedFirstSeen);

  // First delegated rotation; keep a fork of the delegate for the attacker.
  Controller forked = *delegate;
  Controller::RotationSpec spec;
  const DelegationPair rot1 =
      delegate_rotation(delegator, *delegate, spec, DelegationKind::Interaction);
  REQUIRE(feed(p, rot1.delegating).disposition == Disposition::AcceptedFirstSeen);
  REQUIRE(feed(p, rot1.delegated).disposition == Disposition::AcceptedFirstSeen);
  REQUIRE(p.state(delegate->prefix())->last_est_sn == 1);

  // A superseding delegated rotation anchored without any delegator rotation
  // in between: stale authority.
  Controller stale_fork = forked;
  Controller::RotationSpec spec2;
  spec2.next_count = 2;
  const DelegationPair stale =
      delegate_rotation(delegator, stale_fork, spec2, DelegationKind::Interaction);
  REQUIRE(feed(p, stale.delegating).disposition == Disposition::AcceptedFirstSeen);
  const auto stale_out = feed(p, stale.delegated);
  CHECK(stale_out.disposition == Disposition::Rejected);
  CHECK(stale_out.reason == "stale-delegator-authority");

  // After the delegator rotates its own keys, the supersede is accepted.
  REQUIRE(feed(p, delegator.rotate()).disposition == Disposition::AcceptedFirstSeen);
  Controller fresh_fork = forked;
  Controller::RotationSpec spec3;
  spec3.next_count = 3;
  const DelegationPair fresh =
      delegate_rotation(delegator, fresh_fork, spec3, DelegationKind::Interaction);
  REQUIRE(feed(p, fresh.delegating).disposition == Disposition::AcceptedFirstSeen);
  const auto fresh_out = feed(p, fresh.delegated);
  CHECK(fresh_out.disposition == Disposition::SupersedingRecovery);
  CHECK(p.state(delegate->prefix())->keys == fresh.delegated.event.keys);
}

TEST_CASE("replay determinism: identical sequences give bit-identical state") {
  Controller c = Controller::incept(det_bank(24));
  std::vector<SignedEvent> log;
  log.push_back(c.inception());
  log.push_back(c.interact({DigestSeal{"E" + std::string(43, 'Q')}}));
  log.push_back(c.rotate());
  log.push_back(c.interact({}));

  Processor p1, p2;
  for (const auto& msg : log) {
    REQUIRE(feed(p1, msg).disposition == Disposition::AcceptedFirstSeen);
    REQUIRE(feed(p2, msg).disposition == Disposition::AcceptedFirstSeen);
  }
  CHECK(p1.state(c.prefix())->to_json().dump() == p2.state(c.prefix())->to_json().dump());
}

TEST_CASE("pre-rotation fuzz: mutated rotations never pass") {
  std::mt19937_64 rng(777);
  Controller c = Controller::incept(det_bank(25));
  Processor p;
  REQUIRE(feed(p, c.inception()).disposition == Disposition::AcceptedFirstSeen);
  const SignedEvent rot = c.rotate();

  for (int i = 0; i < 100; ++i) {
    KeyEvent mutated = rot.event;
    switch (rng() % 3) {
      case 0: {  // wrong keys
        mutated.keys = {det_bank(static_cast<std::uint8_t>(rng())).qualified_public(rng() % 4)};
        break;
      }
      case 1: {  // wrong sith
        mutated.sith = SigningThreshold::integer(static_cast<std::uint32_t>(2 + rng() % 3));
        mutated.keys.push_back(det_bank(26).qualified_public(rng() % 8));
        break;
      }
      default: {  // wrong prior digest
        auto qm = decode(mutated.prior_digest);
        qm.raw[rng() % qm.raw.size()] ^= static_cast<std::uint8_t>(1 + rng() % 255);
        mutated.prior_digest = encode(qm);
        break;
      }
    }
    const auto bytes = serialize(mutated, SerKind::JSON);
    const auto out = p.apply(bytes, c.sign(bytes));
    REQUIRE(out.disposition != Disposition::AcceptedFirstSeen);
    REQUIRE(out.disposition != Disposition::SupersedingRecovery);
  }
  CHECK(feed(p, rot).disposition == Disposition::AcceptedFirstSeen);
}

TEST_CASE("weighted threshold controls acceptance") {
  ControllerConfig cfg;
  cfg.key_count = 3;
  cfg.next_count = 3;
  cfg.sith = SigningThreshold::from_json(OJson::parse(R"(["1/2","1/2","1/2"])"));
  Controller c = Controller::incept(det_bank(27), cfg);
  Processor p;
  const SignedEvent icp = c.inception();
  // Any two of the three equal weights suffice.
  const auto out = p.apply(icp.bytes, {icp.signatures[0], icp.signatures[2]});
  CHECK(out.disposition == Disposition::AcceptedFirstSeen);
}

TEST_CASE("delegated events escrow until the delegating anchor arrives") {
  Processor p;
  Controller delegator = Controller::incept(det_bank(28));
  REQUIRE(feed(p, delegator.inception()).disposition == Disposition::AcceptedFirstSeen);

  std::optional<Controller> delegate;
  const DelegationPair pair = delegate_inception(delegator, det_bank(29), ControllerConfig{},
                                                 DelegationKind::Interaction, delegate);
  // Delegated event first: no anchor yet, so it waits in escrow.
  const auto early = feed(p, pair.delegated);
  CHECK(early.disposition == Disposition::EscrowedOutOfOrder);
  CHECK(early.reason == "awaiting-delegating-event");
  CHECK(p.state(delegate->prefix()) == nullptr);

  // The anchor lands and the delegated inception drains from escrow.
  const auto anchored = feed(p, pair.delegating);
  CHECK(anchored.disposition == Disposition::AcceptedFirstSeen);
  CHECK(anchored.flushed == 1);
  REQUIRE(p.state(delegate->prefix()));
  CHECK(p.state(delegate->prefix())->delegator == delegator.prefix());
}

TEST_CASE("alternate inception on a basic prefix is detectable duplicity") {
  // Self-addressing prefixes make alternate inceptions unverifiable (the
  // digest pins every field); basic prefixes only pin the key, so a second
  // verifiable version can exist and must surface as duplicity.
  ControllerConfig cfg;
  cfg.prefix_class = PrefixClass::Basic;
  cfg.next_count = 1;
  Controller c = Controller::incept(det_bank(41), cfg);
  Processor p;
  REQUIRE(feed(p, c.inception()).disposition == Disposition::AcceptedFirstSeen);

  ControllerConfig cfg2 = cfg;
  cfg2.next_count = 2;  // same key, different commitment
  Controller alt = Controller::incept(det_bank(41), cfg2);
  REQUIRE(alt.prefix() == c.prefix());
  const auto out = feed(p, alt.inception());
  CHECK(out.disposition == Disposition::Duplicitous);
  CHECK(p.duplicity().size() == 1);
}
