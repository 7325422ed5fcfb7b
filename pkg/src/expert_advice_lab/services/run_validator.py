from ..exceptions import InputError

_VALID_POLICIES = frozenset({"exp4", "qftrl", "qftrl-doubling"})
_VALID_PROTOCOLS = frozenset({"standard", "restricted"})
# the doubling restart test needs Q_t(p_t), i.e. every expert's advice
_FULL_ADVICE_POLICIES = frozenset({"qftrl-doubling"})


class RunValidator:
    @staticmethod
    def validate(policy: str, protocol: str) -> None:
        if policy not in _VALID_POLICIES:
            raise InputError(f"policy must be one of {sorted(_VALID_POLICIES)}, got '{policy}'")
        if protocol not in _VALID_PROTOCOLS:
            raise InputError(f"protocol must be one of {sorted(_VALID_PROTOCOLS)}, got '{protocol}'")
        if protocol == "restricted" and policy in _FULL_ADVICE_POLICIES:
            raise InputError(f"policy '{policy}' needs full advice and cannot run under the restricted protocol")
