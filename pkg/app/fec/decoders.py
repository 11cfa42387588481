"""Decoder selection shared by the CLI and the simulation harness."""

from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from app.fec.channel import to_llr
from app.fec.ldpc import ParityCheckMatrix
from app.fec.mpxorsat import DecodeOutcome, MpHyperParams, decode
from app.fec.reference import GdbfParams, SpaParams, gdbf_decode, spa_decode

DecoderName = Literal["mpxorsat", "spa", "gdbf"]
DECODER_NAMES: tuple[str, ...] = ("mpxorsat", "spa", "gdbf")


class DecoderSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: DecoderName = "mpxorsat"
    mp: MpHyperParams = Field(default_factory=MpHyperParams)
    spa: SpaParams = Field(default_factory=SpaParams)
    gdbf: GdbfParams = Field(default_factory=GdbfParams)

    @property
    def i_max(self) -> int:
        return {"mpxorsat": self.mp.i_max, "spa": self.spa.i_max, "gdbf": self.gdbf.i_max}[self.name]

    @property
    def label(self) -> str:
        """Decoder column value; variants away from the defaults get a suffix."""
        if self.name == "gdbf":
            return "gdbf/multi" if self.gdbf.flip_mode == "multi" else "gdbf"
        if self.name == "spa":
            return "spa"
        parts = ["mpxorsat"]
        if self.mp.flip_mode == "single":
            parts.append("single")
        if self.mp.flip_gate == "none":
            parts.append("ungated")
        if self.mp.gradient != "mp":
            parts.append(self.mp.gradient)
        if not self.mp.normalize:
            parts.append("nonorm")
        if self.mp.llr_input:
            parts.append("llr")
        if self.mp.reset_q_on_flip:
            parts.append("reset")
        if not self.mp.clamp_q:
            parts.append("noclamp")
        return "/".join(parts)

    def csv_params(self, h: ParityCheckMatrix) -> dict:
        """tau/theta/eta/i_max columns; parameters a decoder does not have stay empty."""
        if self.name == "mpxorsat":
            return {"tau": self.mp.margin(h), "theta": self.mp.theta, "eta": self.mp.eta, "i_max": self.mp.i_max}
        if self.name == "gdbf" and self.gdbf.flip_mode == "multi":
            return {"tau": None, "theta": self.gdbf.theta, "eta": None, "i_max": self.gdbf.i_max}
        return {"tau": None, "theta": None, "eta": None, "i_max": self.i_max}

    def active_params(self) -> dict:
        return {"name": self.name, "label": self.label, **getattr(self, "mp" if self.name == "mpxorsat" else self.name).model_dump()}

    def with_mp(self, **changes) -> "DecoderSpec":
        return self.model_copy(update={"mp": MpHyperParams(**{**self.mp.model_dump(), **changes})})


def run_decoder(spec: DecoderSpec, r, h: ParityCheckMatrix, sigma: float, track: bool = False) -> DecodeOutcome:
    r = np.asarray(r, dtype=np.float64)
    if spec.name == "mpxorsat":
        received = to_llr(r, sigma) if spec.mp.llr_input else r
        return decode(received, h, spec.mp, track=track)
    if spec.name == "spa":
        return spa_decode(r, h, sigma, spec.spa, track=track)
    return gdbf_decode(r, h, spec.gdbf, track=track)
