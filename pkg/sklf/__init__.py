"""Neural light fields with ray-space embedding."""
