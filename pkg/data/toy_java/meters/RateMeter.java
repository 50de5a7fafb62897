package toy.meters;

/**
 * Tracks how often samples arrive.
 */
public interface RateMeter extends Meter {

    /**
     * Records a new sample value into the rate meter.
     */
    void record(long value);

    /**
     * Returns an immutable snapshot of the rate meter state.
     */
    String snapshot();

    /** Returns the measurement unit of the rate meter. */
    String unit();
}
