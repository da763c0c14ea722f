"""Published solution records and their verification.

The G63 record below is the publicly reported best-known configuration
(2025): 1750 hex digits encoding 7000 spins whose cut on G63 is 27,047,
two above the previous record of 27,045. Verification is pure arithmetic:
decode the hex, count the crossing edge weight, compare.
"""

from __future__ import annotations

from dataclasses import dataclass

from .codec import decode_hex, hex_length
from .graph import Graph, cut_value

# best cut reported for G63 before the current record
G63_PRIOR_BEST_CUT = 27045

G63_RECORD_HEX = (
    "dc7d48547c2371a88a6d797ca52c047414e1e428043a3423d16bfc4b625c86bc87f6fd"
    "3fdc10ef3586c6e32cf35340632774a7856ed93a59eeaa8fbcfbe58886d08578a81318"
    "7d95f47e1827a27b66f24085c14cb0e1d40f49689f4cdce41d4cc01315cebd1e9404ee"
    "3b1510a3907bd31d26c65595d8f24151feec32549385377eba7d8745ee11237f9aff05"
    "62e406de98d2c36340072e119c29131d5cc004b32be47994d5e08f4c76c11e77988472"
    "d278d442f8599e297e00e5ac8166c1dbc965d89909621ed83eec0a8802423ef71867e0"
    "6fa1de1611fcf38d276cefedd2c87ffce4f12ef3092c3e3f3fe803ce0dae6b1d2b6bc4"
    "70c08e6d481162c3389cbc4b7c58389a219db96ab9769a2dc4a52e832e9dbc7fa83e58"
    "166f3c1b3fb2c4b45896062f55b63b689efd19258a9d18c3e305e1e935c4d2206898d3"
    "b38d13dbc33b38c7a5f92e6c20c956a21e84c2351227139c1b50845b53aecabc7c22e1"
    "c65337e534fd942af24620f3765f79a4b11da0fe230caff68a060ff1de601529013b81"
    "20fc2222a6b4c17545616a4b89bbc8d8f83dc7624395737091f77f58f0de395c09afdb"
    "fa66e8824c091fad3eb216acc521a24d2dca6232084a014bb1a1286afb6a76e9a1e84f"
    "d1f975f8a723091f3242746f24b99ce66ec32ed329352652ff464c13b1da14612072af"
    "e0a36f39d6ca5d5a0586d35517a99369c90544c43016d131074526c59d82874a51bf73"
    "d58d1857ce1ec4ffa2f26ca9e0ec557252f862452b8422a79fe4bdcbda006bb720f530"
    "8033ba559f181e16244224e2bb83d7b557d0c5b05299cc179134c46e6cf2c494fa5459"
    "cb8e631516d9ba81f79ab743426ba0852fb662a0c90c1b0c6527159042b60bb21e1a83"
    "53e121ce2c64b30352b1fd0540625013315ab24ceb1d10cdb48f3010c4997bb3ad6445"
    "b4e58e8dd7fe84fe35d29611c924a590743ce83584b787a58f415802c919dbbb53a6c9"
    "c878f4a77180adec821450c65cca2d3614db9afe641f1959f4fe645889dd59d75e8f6e"
    "8e309534a1d10f29498a597d6599468bfcc88e436d72206cc76ded8f1f2f1b2408f49f"
    "9536e4be441045d97dd60f4c4225b7ef88e2e0d1dc76a99f52510c059f6d926685d65f"
    "14480cbd9a7e89d771ee0aba13cb779e4ea19d7f5068dc53a62f73593217ab83a393e7"
    "b1b58d2f9c2594308adbfb69e6cccc86f68e6f7e19210089854636cdb8519d17def0fb"
)


@dataclass(frozen=True)
class SolutionRecord:
    """A claimed (instance, configuration, cut) triple that can be checked."""

    instance: str
    hex: str
    claimed_cut: int
    source: str = ""


G63_RECORD = SolutionRecord(
    instance="G63",
    hex=G63_RECORD_HEX,
    claimed_cut=27047,
    source="published best-known G63 configuration (2025)",
)


@dataclass(frozen=True)
class VerificationReport:
    instance: str
    computed_cut: int
    claimed_cut: int

    @property
    def match(self) -> bool:
        return self.computed_cut == self.claimed_cut

    def summary(self) -> str:
        status = "MATCH" if self.match else "MISMATCH"
        return (
            f"{self.instance}: computed cut {self.computed_cut}, "
            f"claimed {self.claimed_cut} -> {status}"
        )


def verify_record(rec: SolutionRecord, g: Graph, instance_name: str | None = None) -> VerificationReport:
    """Decode rec.hex against g and compare the computed cut to the claim.

    Raises on structural problems (wrong instance, bad hex length); a wrong
    cut is not an error, it is a MISMATCH report.
    """
    if instance_name is not None and instance_name != rec.instance:
        raise ValueError(
            f"record is for {rec.instance!r}, graph is {instance_name!r}"
        )
    if len(rec.hex) != hex_length(g.n):
        from .codec import CodecError

        raise CodecError(
            f"hex string has {len(rec.hex)} digits, expected {hex_length(g.n)} "
            f"for n={g.n}"
        )
    spins = decode_hex(rec.hex, g.n)
    return VerificationReport(
        instance=rec.instance,
        computed_cut=cut_value(g, spins),
        claimed_cut=rec.claimed_cut,
    )
