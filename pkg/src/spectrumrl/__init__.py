"""spectrumrl: quantum and deep reinforcement learning for ambient-backscatter
assisted device-to-device spectrum access.

Subpackages and modules:

* ``channel``  -- deterministic radio-link rates (path loss, D2D, backscatter)
* ``env``      -- the slotted spectrum-access MDP
* ``qsim``     -- dense statevector simulator (compiled kernels + numpy fallback)
* ``qpolicy``  -- data re-uploading circuit policy trained with REINFORCE
* ``nn``       -- minimal MLP with manual backprop and Adam
* ``dqn``      -- deep Q-learning baseline (replay buffer, target network)
* ``harness``  -- experiment runner, CSV/JSON outputs, CLI
"""

__version__ = "0.1.0"
