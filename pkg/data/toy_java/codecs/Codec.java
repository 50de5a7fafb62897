package toy.codecs;

/**
 * Two-way transformation between raw bytes and printable text.
 */
public abstract class Codec {

    /**
     * Encodes the given bytes with this codec.
     *
     * @param data the raw input, never null
     * @return printable text
     */
    public abstract String encode(byte[] data);

    /**
     * Decodes the given text with this codec.
     */
    public abstract byte[] decode(String text);

    /** Returns the display name of the codec. */
    public String name() {
        return getClass().getSimpleName();
    }

    /** Version. */
    public int version() {
        return 1;
    }
}
