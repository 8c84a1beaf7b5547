"""
Eavesdropping on BB84
=====================

Alice sends random bits in random bases, Bob measures in random bases and
they keep the positions where the bases agree. Any eavesdropper who tries to
learn the bits disturbs them, and the disturbance shows up as errors on a
sample of the sifted key.
"""
from twoq.bb84 import Bb84Config, enumerate_intercept_resend, make_eavesdropper, run_bb84

print("exact intercept-resend QBER:", enumerate_intercept_resend())

# %%
for name in ("none", "intercept-resend", "postselect-clone"):
    res = run_bb84(Bb84Config(10_000, seed=1, eve=make_eavesdropper(name)))
    by_basis = ", ".join(f"{b} {q:.3f}" for b, q in res.qber_by_basis.items())
    print(f"{name:17s} sifted {res.sifted_length}  QBER {res.qber:.4f} ({by_basis})  "
          f"Eve knows {res.eve_information:.3f} of the key")

# %%
# The cloning attack copies Z-basis pulses perfectly, so Z bits carry no
# errors. On X-basis pulses the copy is no better than a coin and Bob's
# copy is damaged, which is where the errors come from.
res = run_bb84(Bb84Config(10_000, seed=1, eve=make_eavesdropper("postselect-clone")))
print("clone fidelity on X pulses:", res.max_clone_fidelity_x)
