"""Energy-harvesting dual-hop fixed-gain AF relaying over Nakagami-m / alpha-mu fading."""
