"""The typed span record all annotators produce."""

from dataclasses import dataclass


@dataclass
class Annotation:
    unit_id: str
    start: int
    end: int
    a_type: str  # PER|ORG|LOC|DICT:<list>|EMAIL|PHONE|URL|TIME|KEYTERM|MANUAL:<label>
    surface: str
    norm: str
    provenance: str  # gazetteer|dictionary|pattern|temporal|keyterm|manual|external

    def to_record(self) -> dict:
        return {
            "unit_id": self.unit_id,
            "start": self.start,
            "end": self.end,
            "a_type": self.a_type,
            "surface": self.surface,
            "norm": self.norm,
            "provenance": self.provenance,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "Annotation":
        return cls(
            unit_id=rec["unit_id"],
            start=rec["start"],
            end=rec["end"],
            a_type=rec["a_type"],
            surface=rec["surface"],
            norm=rec["norm"],
            provenance=rec["provenance"],
        )
